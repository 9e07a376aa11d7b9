"""Module for writing a source as an answer-set program.

The program encodes the laws of the action description, the consistency,
inertia and completion axioms of the language and, as facts, a set of
initial literals I, a set of forced fluents F and a qualified action
sequence s. Its answer sets encode exactly the models of the completion
of I w.r.t. F under s. Rules use '-' for classical negation, 'not' for
default negation and '|' for disjunction; 'fluent/1' and 'step/1' facts
bound the variables F and I so that the program can be grounded.

This file can also be imported as a module and contains the following
functions:

    * emit_program - the program for given I, F and s.

    * emit_for_findmatch_stage - the program queried by one stage of the
    match search: the expansion, a candidate check or the comparison
    check.

    * write_program - save a program as a '.lp' file.

"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

from acir.functions.core_types import (
    DynamicLaw,
    ExecutabilityCondition,
    Literal,
    Source,
    StateConstraint,
    Truth,
)
from acir.functions.transition import (
    QualifiedActionSequence,
    fully_qualified,
    format_sequence,
    unqualified,
)
from acir.functions import utils

logger = logging.getLogger(__name__)

STAGES = ("expansion", "c1", "c2")

CONSISTENCY = (
    ":- holds(F,I), u(F,I).",
    ":- -holds(F,I), u(F,I).",
)

INERTIA = (
    "holds(F,I+1) :- holds(F,I), not -holds(F,I+1), not u(F,I+1), step(I+1).",
    "-holds(F,I+1) :- -holds(F,I), not holds(F,I+1), not u(F,I+1), step(I+1).",
    "u(F,I+1) :- u(F,I), not holds(F,I+1), not -holds(F,I+1), step(I+1).",
)

# the first forcing rule guards only on -init(F), the second on both
COMPLETION = (
    "holds(F,0) :- init(F).",
    "-holds(F,0) :- -init(F).",
    "holds(F,0) :- forced(F), default(F), not -init(F).",
    "holds(F,0) | -holds(F,0) :- forced(F), not default(F), not init(F), "
    "not -init(F).",
    "-holds(F,0) :- default(F), not holds(F,0).",
    "u(F,0) :- fluent(F), not default(F), not holds(F,0), not -holds(F,0).",
)


@dataclass(frozen=True)
class EmittedProgram:
    """Rules of a program, one per line, with a comment header.

    'horizon' is the number of time points, one more than the number of
    steps; 'stats' counts the rules of every family.
    """

    rules: Tuple[str, ...]
    horizon: int
    stats: Dict[str, int] = field(default_factory=dict, compare=False)
    header: Tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return "\n".join(self.header + self.rules) + "\n"


def _holds(literal: Literal, time: str) -> str:
    if literal.value is Truth.TRUE:
        return f"holds({literal.fluent},{time})"
    if literal.value is Truth.FALSE:
        return f"-holds({literal.fluent},{time})"
    return f"u({literal.fluent},{time})"


def _body(*parts: str, conditions: Iterable[Literal] = ()) -> str:
    atoms = list(parts[:1]) + [_holds(c, "I") for c in conditions] + list(parts[1:])
    return ", ".join(atoms)


def _law_rules(law) -> Tuple[str, ...]:
    if isinstance(law, DynamicLaw):
        occurs = f"occurs({law.action},I)"
        consequence = law.consequence
        if not consequence.is_proper:
            body = _body(occurs, conditions=law.conditions)
            return (f"{_holds(consequence, 'I+1')} :- {body}.",)
        f = consequence.fluent
        keep = _body(occurs, f"not split({f},I)", conditions=law.conditions)
        split = _body(occurs, f"split({f},I)", conditions=law.conditions)
        return (
            f"u({f},I+1) :- {keep}.",
            f"holds({f},I+1) | -holds({f},I+1) :- {split}.",
        )
    if isinstance(law, StateConstraint):
        body = ", ".join([_holds(c, "I") for c in law.conditions] + ["step(I)"])
        return (f"{_holds(law.head, 'I')} :- {body}.",)
    if isinstance(law, ExecutabilityCondition):
        body = _body(f"occurs({law.action},I)", "step(I)", conditions=law.conditions)
        return (f":- {body}.",)
    raise TypeError("'law' should be a law of the action description.")


def emit_program(
    source: Source,
    forced: Iterable[str],
    sequence: QualifiedActionSequence,
    initial: Optional[Iterable[Literal]] = None,
) -> EmittedProgram:
    """Build the program for initial literals, forced fluents and a
    qualified sequence.

    Parameters
    ----------
    source : Source
        Source providing the signature, defaults and laws.
    forced : Iterable[str]
        Forced fluents F.
    sequence : QualifiedActionSequence
        Qualified action sequence s.
    initial : Iterable[Literal], optional
        Initial literals I. The default is the source's initial set.

    Returns
    -------
    EmittedProgram
        Facts, law rules, consistency, inertia and completion axioms, in
        this order.
    """
    if not isinstance(source, Source):
        raise TypeError("'source' should be a Source.")
    forced = sorted(set(forced))
    sequence = tuple(sequence)
    initial = source.initial if initial is None else frozenset(initial)
    horizon = len(sequence) + 1

    facts = [f"fluent({f})." for f in source.fluents]
    facts += [f"step({i})." for i in range(horizon)]
    facts += [f"default({f})." for f in sorted(source.defaults)]
    for literal in sorted(initial):
        sign = "-" if literal.value is Truth.FALSE else ""
        facts.append(f"{sign}init({literal.fluent}).")
    facts += [f"forced({f})." for f in forced]
    for i, step in enumerate(sequence):
        facts += [f"occurs({e},{i})." for e in sorted(step.action)]
    for i, step in enumerate(sequence):
        facts += [f"split({f},{i})." for f in sorted(step.qualifier)]

    laws = []
    for law in source.description.sorted_laws:
        laws.extend(_law_rules(law))

    header = (
        f"% source: {source.id}",
        "% forced: {" + ", ".join(forced) + "}",
        f"% sequence: {format_sequence(sequence)}",
        f"% horizon: {horizon}",
    )
    stats = {
        "facts": len(facts),
        "laws": len(laws),
        "consistency": len(CONSISTENCY),
        "inertia": len(INERTIA),
        "completion": len(COMPLETION),
    }
    rules = tuple(facts + laws) + CONSISTENCY + INERTIA + COMPLETION
    return EmittedProgram(rules, horizon, stats, header)


def emit_for_findmatch_stage(
    source: Source,
    stage: str,
    forced: Optional[Iterable[str]] = None,
    sequence: Optional[QualifiedActionSequence] = None,
    initial: Optional[Iterable[Literal]] = None,
) -> EmittedProgram:
    """Build the program queried by one stage of the match search.

    Parameters
    ----------
    source : Source
        The source.
    stage : str
        'expansion' forces every non-default fluent and splits every
        fluent at every step, from the source's initial set; 'c1' is the
        candidate check, by default from the given initial set with no
        forced fluent and the unqualified sequence; 'c2' is the
        comparison check, from the given initial set (empty by default)
        with no forced fluent and no step.
    forced, sequence, initial : optional
        Overrides of the stage arguments; ignored by 'expansion'.

    Returns
    -------
    EmittedProgram
        The program.

    Raises
    ------
    ValueError
        Unknown stage.
    """
    if stage not in STAGES:
        raise ValueError(f"'stage' should be one of {', '.join(STAGES)}.")
    if stage == "expansion":
        return emit_program(
            source,
            source.non_default_fluents,
            fully_qualified(source.sequence, source.fluents),
        )
    if stage == "c1":
        return emit_program(
            source,
            forced or (),
            unqualified(source.sequence) if sequence is None else sequence,
            initial,
        )
    return emit_program(source, (), (), initial or ())


def write_program(
    program: EmittedProgram, path: Union[str, os.PathLike], rewrite: bool = True
) -> None:
    """Save a program as a '.lp' file."""
    utils.prepare_output(path, rewrite)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(program.text)
    logger.info("Program with %d rules written to %s", len(program.rules), path)
