"""Module for building initial states from a partial initial set.

Default fluents are assumed false unless stated; forcing a fluent
overrides the assumption and considers both of its truth values. The
completion of a set applies the defaults, closes the set under the state
constraints and marks every fluent left open as unknown.

This file can also be imported as a module and contains the following
functions:

    * force - forcing I[f] of a single fluent.

    * force_all - forcing I[F] of a set of fluents.

    * complete - completion of a set of fluent literals into a state.

    * completion_set - completions of all forced variants of a set.

    * conservative_expansion - initial literals implied because their
    contraries admit no execution of the action sequence.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Optional, Sequence, Set

from acir.functions.core_types import (
    Action,
    ActionDescription,
    Literal,
    Source,
    Truth,
    negative,
    positive,
    unknown,
)
from acir.functions.transition import (
    StateSet,
    close_assignment,
    to_assignment,
    exists_path,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Completion:
    """Completion of a set w.r.t. forced fluents: states and degree |F|."""

    states: FrozenSet[StateSet]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))

    def __len__(self) -> int:
        return len(self.states)


def force(
    initial: Iterable[Literal], fluent: str, defaults: Iterable[str]
) -> Set[FrozenSet[Literal]]:
    """Compute the forcing I[f] of a fluent.

    Parameters
    ----------
    initial : Iterable[Literal]
        Consistent set I.
    fluent : str
        Fluent to force.
    defaults : Iterable[str]
        Default fluents.

    Returns
    -------
    Set[FrozenSet[Literal]]
        {I + {f}} for a default fluent without -f or u(f) in I; {I + {f},
        I + {-f}} for a non-default fluent absent from I; {I} otherwise.
    """
    initial = frozenset(initial)
    if fluent in set(defaults):
        if negative(fluent) in initial or unknown(fluent) in initial:
            return {initial}
        return {initial | {positive(fluent)}}
    if any(lit.fluent == fluent for lit in initial):
        return {initial}
    return {initial | {positive(fluent)}, initial | {negative(fluent)}}


def force_all(
    initial: Iterable[Literal],
    fluents: Iterable[str],
    defaults: Iterable[str],
) -> Set[FrozenSet[Literal]]:
    """Compute the forcing I[F], one fluent at a time in name order.

    An empty F gives {I}.
    """
    defaults = frozenset(defaults)
    result = {frozenset(initial)}
    for fluent in sorted(set(fluents)):
        result = {
            forced for current in result for forced in force(current, fluent, defaults)
        }
    return result


def complete(
    initial: Iterable[Literal],
    description: ActionDescription,
    defaults: Iterable[str],
    fluents: Iterable[str],
) -> Optional[StateSet]:
    """Compute the completion of a set of fluent literals.

    Every default fluent not mentioned in the set is assumed false, the
    result is closed under the state constraints and the fluents still
    unassigned are made unknown.

    Parameters
    ----------
    initial : Iterable[Literal]
        Consistent set of fluent literals.
    description : ActionDescription
        Action description providing the state constraints.
    defaults : Iterable[str]
        Default fluents.
    fluents : Iterable[str]
        All fluents of the signature.

    Returns
    -------
    StateSet or None
        The completion, or None if the closure is inconsistent.
    """
    mapping = to_assignment(initial)
    if mapping is None:
        return None
    for fluent in defaults:
        mapping.setdefault(fluent, Truth.FALSE)
    closed = close_assignment(mapping, description.state_constraints)
    if closed is None:
        return None
    for fluent in fluents:
        closed.setdefault(fluent, Truth.UNKNOWN)
    return StateSet.from_mapping(closed)


def completion_set(
    initial: Iterable[Literal],
    forced: Iterable[str],
    description: ActionDescription,
    defaults: Iterable[str],
    fluents: Iterable[str],
) -> Completion:
    """Completions of the forced variants I' in I[F] that exist."""
    forced = frozenset(forced)
    fluents = tuple(fluents)
    defaults = frozenset(defaults)
    states = set()
    for variant in force_all(initial, forced, defaults):
        state = complete(variant, description, defaults, fluents)
        if state is not None:
            states.add(state)
    return Completion(states, len(forced))


def source_completion(source: Source, forced: Iterable[str]) -> Completion:
    return completion_set(
        source.initial,
        forced,
        source.description,
        source.defaults,
        source.fluents,
    )


def conservative_expansion(
    initial: Iterable[Literal],
    sequence: Sequence[Action],
    description: ActionDescription,
    defaults: Iterable[str],
    fluents: Iterable[str],
) -> Optional[FrozenSet[Literal]]:
    """Compute the conservative expansion of I under a sequence.

    The non-default fluents are forced; a variant I' qualifies when its
    completion exists and the sequence can be executed from it, reasoning
    by cases on any unknown effect. The expansion is the intersection of
    the qualifying variants.

    Parameters
    ----------
    initial : Iterable[Literal]
        Consistent set I.
    sequence : Sequence[Action]
        The action sequence of the source.
    description : ActionDescription
        The action description.
    defaults : Iterable[str]
        Default fluents.
    fluents : Iterable[str]
        All fluents of the signature.

    Returns
    -------
    FrozenSet[Literal] or None
        The expansion; None if no variant qualifies. An empty set is a
        legitimate expansion.

    Raises
    ------
    EmergentNonDeterminism
        Propagated from the successor computation.
    """
    defaults = frozenset(defaults)
    fluents = tuple(sorted(fluents))
    variants = force_all(
        initial, (f for f in fluents if f not in defaults), defaults
    )

    expansion = None
    for variant in sorted(variants, key=sorted):
        state = complete(variant, description, defaults, fluents)
        if state is None or not exists_path([state], sequence, description):
            continue
        expansion = variant if expansion is None else expansion & variant
    if expansion is None:
        logger.debug("No forced variant of the initial set has a model")
    return expansion


def source_expansion(source: Source) -> Optional[FrozenSet[Literal]]:
    return conservative_expansion(
        source.initial,
        source.sequence,
        source.description,
        source.defaults,
        source.fluents,
    )
