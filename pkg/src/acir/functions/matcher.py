"""Module for matching a source against a query and scoring the match.

A source matches a query q when, after reasoning by cases on a set F of
fluents and on the unknown effects selected by a qualified extension s
of its action sequence, some model entails +-q (condition c1), and the
entailment does not come solely from the assumptions made on the
initial state (condition c2). The semantic score is the smallest
|F| + (total qualifier size of s) over all such witnesses, infinite if
there is none. The search visits candidate pairs by increasing budget,
so the first accepted pair is minimal.

This file can also be imported as a module and contains the following
functions:

    * qualifier_pool - the (step, fluent) pairs a qualifier can pick.

    * candidate_iterator - all pairs (F, s) of a given budget.

    * check_c1 - models of a candidate that entail +-q.

    * assumed_literals - initial literals of a model not in the expansion.

    * comparison_state - the state a model is compared against in c2.

    * check_c2 - check that a model is not explained by the assumptions
    alone.

    * find_match - budget-ordered search for a minimal witness.

    * score - semantic score of a source for a query.

    * format_explanation - human-readable account of a match result.

"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import FrozenSet, Iterator, List, Optional, Tuple, Union

from acir.functions.core_types import (
    AcirError,
    Literal,
    Query,
    Source,
    Truth,
    format_literals,
    negative,
    positive,
)
from acir.functions.initial_state import (
    complete,
    completion_set,
    source_expansion,
)
from acir.functions.transition import (
    Path,
    PlusMinus,
    QualifiedActionSequence,
    QualifiedStep,
    StateSet,
    entails,
    format_sequence,
    models,
    unqualified,
)

logger = logging.getLogger(__name__)

Score = Union[int, float]


class QueryNotInSignature(AcirError, ValueError):
    def __init__(self, query: Query, source_id: str):
        self.query = query
        self.source_id = source_id
        super().__init__(
            f"query fluent '{query.fluent}' is not a fluent of source "
            f"'{source_id}'"
        )

    def details(self) -> dict:
        return {"query": self.query.fluent, "source": self.source_id}


@dataclass
class Diagnostics:
    """Counters of one search."""

    candidates: int = 0
    models: int = 0
    elapsed: float = 0.0
    capped: bool = False


@dataclass
class MatchResult:
    matched: bool
    score: Score
    witness_F: FrozenSet[str] = frozenset()
    witness_s: QualifiedActionSequence = ()
    witness_path: Optional[Path] = None
    expansion: Optional[FrozenSet[Literal]] = None
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def witness_summary(self) -> Optional[dict]:
        if not self.matched:
            return None
        return {
            "F": sorted(self.witness_F),
            "s": [
                {"action": sorted(step.action), "qualifier": sorted(step.qualifier)}
                for step in self.witness_s
            ],
        }


def qualifier_pool(source: Source) -> List[Tuple[int, str]]:
    """Return the (step, fluent) pairs a qualifier can contain.

    A fluent can only be split at step i if some dynamic law of an
    elementary action of a_i has u(f) as consequence; the applicability
    of the law in a given state is not considered.
    """
    unknown_effects = {}
    for law in source.description.dynamic_laws:
        if law.consequence.is_proper:
            unknown_effects.setdefault(law.action, set()).add(law.consequence.fluent)
    pool = []
    for step, action in enumerate(source.sequence):
        fluents = set()
        for name in action:
            fluents |= unknown_effects.get(name, set())
        pool.extend((step, fluent) for fluent in sorted(fluents))
    return pool


def _extension(
    source: Source, picks: Tuple[Tuple[int, str], ...]
) -> QualifiedActionSequence:
    qualifiers = [set() for _ in source.sequence]
    for step, fluent in picks:
        qualifiers[step].add(fluent)
    return tuple(
        QualifiedStep(action, qualifier)
        for action, qualifier in zip(source.sequence, qualifiers)
    )


def candidate_iterator(
    source: Source,
    budget: int,
    pool: Optional[List[Tuple[int, str]]] = None,
) -> Iterator[Tuple[FrozenSet[str], QualifiedActionSequence]]:
    """Enumerate the pairs (F, s) with |F| + (qualifier size of s) = budget.

    Pairs come by increasing |F|, then F in lexicographic order of its
    sorted fluents, then qualifier picks ordered by step index and
    fluent name. Budget 0 gives exactly (empty set, unqualified
    sequence).

    Parameters
    ----------
    source : Source
        The source.
    budget : int
        Exact budget of the pairs.
    pool : List[Tuple[int, str]], optional
        Precomputed qualifier pool of the source.

    Yields
    ------
    Tuple[FrozenSet[str], QualifiedActionSequence]
        Candidate pairs.
    """
    if not isinstance(budget, int) or budget < 0:
        raise TypeError("'budget' should be a non-negative integer.")
    if pool is None:
        pool = qualifier_pool(source)
    for size in range(min(budget, len(source.fluents)) + 1):
        picks = budget - size
        if picks > len(pool):
            continue
        for forced in itertools.combinations(source.fluents, size):
            for chosen in itertools.combinations(pool, picks):
                yield frozenset(forced), _extension(source, chosen)


def check_c1(
    source: Source,
    query: Query,
    forced: FrozenSet[str],
    sequence: QualifiedActionSequence,
    expansion: FrozenSet[Literal],
) -> List[Path]:
    """Return the models of the candidate that entail +-q."""
    states = source_completion_from(source, expansion, forced)
    target = PlusMinus(query.fluent)
    return [p for p in models(states, sequence, source.description) if entails(p, target)]


def source_completion_from(
    source: Source, initial: FrozenSet[Literal], forced: FrozenSet[str]
):
    """Completion set of a replacement initial set w.r.t. forced fluents."""
    return completion_set(
        initial, forced, source.description, source.defaults, source.fluents
    ).states


def assumed_literals(path: Path, expansion: FrozenSet[Literal]) -> FrozenSet[Literal]:
    """Initial fluent literals of a path that are not in the expansion."""
    return frozenset(
        lit
        for lit in path.initial.literals
        if not lit.is_proper and lit not in expansion
    )


def comparison_state(
    source: Source, path: Path, expansion: FrozenSet[Literal]
) -> Optional[StateSet]:
    """Completion of the assumed literals of a path; None if that
    completion does not exist.
    """
    assumed = assumed_literals(path, expansion)
    return complete(assumed, source.description, source.defaults, source.fluents)


def check_c2(
    source: Source,
    query: Query,
    path: Path,
    expansion: FrozenSet[Literal],
) -> bool:
    """Check that the entailment of +-q by a model is not explained by
    the assumptions on its initial state alone.

    The assumed literals of the initial state are completed on their
    own. The model passes if the resulting state leaves q unknown or
    gives q the value opposite to the one entailed by the model. A
    missing completion has no models and passes vacuously.
    """
    state = comparison_state(source, path, expansion)
    if state is None:
        return True
    reference = state.value(query.fluent)
    if reference is Truth.UNKNOWN:
        return True
    if reference is Truth.FALSE:
        return entails(path, positive(query.fluent))
    return entails(path, negative(query.fluent))


def find_match(
    source: Source, query: Query, budget_cap: Optional[int] = None
) -> MatchResult:
    """Search for a minimal witness of a match.

    Parameters
    ----------
    source : Source
        Validated source.
    query : Query
        Query over a fluent of the source.
    budget_cap : int, optional
        Largest budget to try. None searches the whole finite space, so an
        unmatched result is exact; with a cap smaller than the space an
        unmatched result only states that the score exceeds the cap and is
        flagged in the diagnostics.

    Returns
    -------
    MatchResult
        Matched result with score equal to the budget of the first
        accepted pair, or unmatched with an infinite score.

    Raises
    ------
    QueryNotInSignature
        The query fluent is not declared by the source.
    EmergentNonDeterminism
        Propagated from the successor computation.
    """
    if not isinstance(source, Source):
        raise TypeError("'source' should be a Source.")
    if not isinstance(query, Query):
        raise TypeError("'query' should be a Query.")
    if budget_cap is not None and (not isinstance(budget_cap, int) or budget_cap < 0):
        raise TypeError("'budget_cap' should be a non-negative integer or None.")
    if query.fluent not in source.signature.fluents:
        raise QueryNotInSignature(query, source.id)

    diagnostics = Diagnostics()
    start = time.perf_counter()

    def _finish(result: MatchResult) -> MatchResult:
        diagnostics.elapsed = time.perf_counter() - start
        result.diagnostics = diagnostics
        return result

    expansion = source_expansion(source)
    if expansion is None:
        logger.debug("Source '%s' has no conservative expansion", source.id)
        return _finish(MatchResult(False, math.inf))

    pool = qualifier_pool(source)
    limit = len(source.fluents) + len(pool)
    top = limit if budget_cap is None else min(budget_cap, limit)

    for budget in range(top + 1):
        logger.debug("Source '%s': trying budget %d", source.id, budget)
        for forced, sequence in candidate_iterator(source, budget, pool):
            diagnostics.candidates += 1
            for path in check_c1(source, query, forced, sequence, expansion):
                diagnostics.models += 1
                if check_c2(source, query, path, expansion):
                    return _finish(
                        MatchResult(
                            True, budget, forced, sequence, path, expansion
                        )
                    )

    if top < limit:
        diagnostics.capped = True
        logger.info(
            "Source '%s': no match up to budget %d, score > cap", source.id, top
        )
    return _finish(MatchResult(False, math.inf, expansion=expansion))


def score(
    source: Source, query: Query, budget_cap: Optional[int] = None
) -> Score:
    """Semantic score of a source for a query (math.inf if unmatched)."""
    return find_match(source, query, budget_cap).score


def format_explanation(
    result: MatchResult, source: Source, query: Query
) -> str:
    """Describe a match result: expansion, witness and comparison state."""
    lines = [f"source: {source.id}", f"query: {query.fluent}"]
    if result.expansion is None:
        lines.append("expansion: none (the sequence cannot be executed)")
    else:
        lines.append(f"expansion: {format_literals(result.expansion)}")
    if not result.matched:
        verdict = "score > cap" if result.diagnostics.capped else "score inf"
        lines.append(f"no match ({verdict})")
        return "\n".join(lines) + "\n"

    lines.append(f"score: {result.score}")
    lines.append("F: {" + ", ".join(sorted(result.witness_F)) + "}")
    lines.append(f"s: {format_sequence(result.witness_s)}")
    lines.append("path:")
    path = result.witness_path
    lines.append(f"  0: {path.states[0]}")
    for i, (action, state) in enumerate(zip(path.actions, path.states[1:])):
        step = result.witness_s[i]
        lines.append(f"  {i + 1}: {step} -> {state}")
    state = comparison_state(source, path, result.expansion)
    lines.append(f"compared with: {state if state is not None else 'none'}")
    return "\n".join(lines) + "\n"


def unmatched_models(source: Source) -> List[Path]:
    """Models of the unqualified sequence from the expansion, or from the
    source's own initial set when the expansion does not exist.
    """
    initial = source_expansion(source)
    if initial is None:
        initial = source.initial
    states = source_completion_from(source, initial, frozenset())
    return models(states, unqualified(source.sequence), source.description)
