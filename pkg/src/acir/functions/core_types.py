"""Module with the value types of the action language.

Every symbol of the formalism (fluents, literals, actions, laws, sources
and queries) is represented here as an immutable value, so that sources
can be shared between worker processes and used as dictionary keys.
Fluents and elementary actions are plain identifier strings.

This file can also be imported as a module and contains the following
functions:

    * positive - fluent literal f.

    * negative - fluent literal -f.

    * unknown - proper extended literal u(f).

    * complement - complement of a fluent literal, -f for f and f for
    -f.

    * is_consistent - check that a set of extended literals holds at
    most one of f, -f, u(f) for every fluent.

    * validate_source - collect all violations of the type invariants of
    a source into a list of messages.

"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property, total_ordering
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

IDENTIFIER = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
KEYWORDS = frozenset({"causes", "if", "impossible"})


class AcirError(Exception):
    """Base class of all errors raised by the package."""

    def details(self) -> dict:
        """Fields rendered next to the message in CLI diagnostics."""
        return {}


class Truth(enum.IntEnum):
    """Three-valued assignment of a fluent in a set of extended literals."""

    TRUE = 0
    FALSE = 1
    UNKNOWN = 2


@total_ordering
@dataclass(frozen=True)
class Literal:
    """Extended fluent literal: f, -f or u(f).

    Literals with a TRUE or FALSE value are the fluent literals; the
    UNKNOWN value gives the proper extended literal u(f). Literals sort
    positive first, then negative, then unknown, each group by fluent
    name.
    """

    fluent: str
    value: Truth = Truth.TRUE

    @property
    def is_proper(self) -> bool:
        return self.value is Truth.UNKNOWN

    def sort_key(self) -> Tuple[int, str]:
        return (int(self.value), self.fluent)

    def __lt__(self, other: "Literal") -> bool:
        if not isinstance(other, Literal):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.value is Truth.TRUE:
            return self.fluent
        if self.value is Truth.FALSE:
            return f"-{self.fluent}"
        return f"u({self.fluent})"


# A fluent literal is a Literal whose value is not UNKNOWN; the alias
# only documents intent in signatures.
FluentLiteral = Literal
ExtendedLiteral = Literal
Action = FrozenSet[str]


def positive(fluent: str) -> Literal:
    return Literal(fluent, Truth.TRUE)


def negative(fluent: str) -> Literal:
    return Literal(fluent, Truth.FALSE)


def unknown(fluent: str) -> Literal:
    return Literal(fluent, Truth.UNKNOWN)


def complement(literal: Literal) -> Literal:
    """Return the complement of a fluent literal.

    Parameters
    ----------
    literal : Literal
        Fluent literal f or -f.

    Returns
    -------
    Literal
        -f for f and f for -f.

    Raises
    ------
    ValueError
        If a proper extended literal u(f) is given; it has no complement.
    """
    if literal.value is Truth.TRUE:
        return negative(literal.fluent)
    if literal.value is Truth.FALSE:
        return positive(literal.fluent)
    raise ValueError(f"'{literal}' is not a fluent literal.")


def is_consistent(literals: Iterable[Literal]) -> bool:
    """Check that at most one of f, -f, u(f) is present per fluent."""
    seen = {}
    for literal in literals:
        if seen.setdefault(literal.fluent, literal.value) != literal.value:
            return False
    return True


def format_literals(literals: Iterable[Literal]) -> str:
    return "{" + ", ".join(str(lit) for lit in sorted(literals)) + "}"


def format_action(action: Iterable[str]) -> str:
    members = sorted(action)
    if len(members) == 1:
        return members[0]
    return "{" + ", ".join(members) + "}"


def _canonical(conditions: Iterable[Literal]) -> Tuple[Literal, ...]:
    return tuple(sorted(set(conditions)))


@dataclass(frozen=True)
class DynamicLaw:
    """Law 'e causes lambda if l1, ..., ln'."""

    action: str
    consequence: Literal
    conditions: Tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conditions", _canonical(self.conditions))

    def sort_key(self):
        return (0, self.action, self.consequence.sort_key(), self.conditions)

    def __str__(self) -> str:
        text = f"{self.action} causes {self.consequence}"
        if self.conditions:
            text += " if " + ", ".join(str(c) for c in self.conditions)
        return text


@dataclass(frozen=True)
class StateConstraint:
    """Law 'l0 if l1, ..., ln'."""

    head: Literal
    conditions: Tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conditions", _canonical(self.conditions))

    def sort_key(self):
        return (1, "", self.head.sort_key(), self.conditions)

    def __str__(self) -> str:
        return f"{self.head} if " + ", ".join(str(c) for c in self.conditions)


@dataclass(frozen=True)
class ExecutabilityCondition:
    """Law 'impossible e if l1, ..., ln'."""

    action: str
    conditions: Tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conditions", _canonical(self.conditions))

    def sort_key(self):
        return (2, self.action, (0, ""), self.conditions)

    def __str__(self) -> str:
        return f"impossible {self.action} if " + ", ".join(
            str(c) for c in self.conditions
        )


Law = Union[DynamicLaw, StateConstraint, ExecutabilityCondition]


@dataclass(frozen=True)
class Signature:
    fluents: FrozenSet[str]
    actions: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "fluents", frozenset(self.fluents))
        object.__setattr__(self, "actions", frozenset(self.actions))

    @cached_property
    def sorted_fluents(self) -> Tuple[str, ...]:
        return tuple(sorted(self.fluents))


@dataclass(frozen=True)
class ActionDescription:
    """A set of laws, split by kind on first access."""

    laws: FrozenSet[Law] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "laws", frozenset(self.laws))

    @cached_property
    def sorted_laws(self) -> Tuple[Law, ...]:
        return tuple(sorted(self.laws, key=lambda law: law.sort_key()))

    @cached_property
    def dynamic_laws(self) -> Tuple[DynamicLaw, ...]:
        return tuple(x for x in self.sorted_laws if isinstance(x, DynamicLaw))

    @cached_property
    def state_constraints(self) -> Tuple[StateConstraint, ...]:
        return tuple(
            x for x in self.sorted_laws if isinstance(x, StateConstraint)
        )

    @cached_property
    def executability_conditions(self) -> Tuple[ExecutabilityCondition, ...]:
        return tuple(
            x
            for x in self.sorted_laws
            if isinstance(x, ExecutabilityCondition)
        )


@dataclass(frozen=True)
class Source:
    """A source <signature, defaults, description, initial, sequence>.

    The identifier is not part of the formalism; it keeps ranking output
    stable and defaults to the file name stem when loaded from disk.
    """

    id: str
    signature: Signature
    defaults: FrozenSet[str] = frozenset()
    description: ActionDescription = field(default_factory=ActionDescription)
    initial: FrozenSet[Literal] = frozenset()
    sequence: Tuple[Action, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "defaults", frozenset(self.defaults))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(
            self, "sequence", tuple(frozenset(a) for a in self.sequence)
        )

    @property
    def fluents(self) -> Tuple[str, ...]:
        return self.signature.sorted_fluents

    @property
    def non_default_fluents(self) -> Tuple[str, ...]:
        return tuple(f for f in self.fluents if f not in self.defaults)


@dataclass(frozen=True)
class Query:
    """A query is a single fluent."""

    fluent: str

    def __str__(self) -> str:
        return self.fluent


def _law_symbols(law: Law) -> Tuple[List[str], List[str]]:
    fluents = [c.fluent for c in law.conditions]
    actions = []
    if isinstance(law, DynamicLaw):
        fluents.append(law.consequence.fluent)
        actions.append(law.action)
    elif isinstance(law, StateConstraint):
        fluents.append(law.head.fluent)
    else:
        actions.append(law.action)
    return fluents, actions


def _check_identifier(name: str, kind: str) -> Optional[str]:
    if not isinstance(name, str) or not IDENTIFIER.match(name):
        return f"invalid {kind} name '{name}'"
    if name in KEYWORDS:
        return f"{kind} name '{name}' is a reserved word"
    return None


def validate_source(source: Source) -> List[str]:
    """Collect the violations of the type invariants of a source.

    Checked are identifier syntax, disjointness of fluent and action
    names, closure of the laws, initial set and sequence over the
    signature, consistency of the initial set, defaults being fluents,
    non-empty actions in the sequence and well-formed laws (plain fluent
    literals as conditions and state-constraint heads). Emergent
    non-determinism is checked separately by the transition module.

    Parameters
    ----------
    source : Source
        Source to check.

    Returns
    -------
    List[str]
        Violation messages in a deterministic order; empty if the source
        is valid.
    """
    if not isinstance(source, Source):
        raise TypeError("'source' should be a Source.")

    report = []
    signature = source.signature
    for name in sorted(signature.fluents):
        problem = _check_identifier(name, "fluent")
        if problem:
            report.append(problem)
    for name in sorted(signature.actions):
        problem = _check_identifier(name, "action")
        if problem:
            report.append(problem)
    for name in sorted(signature.fluents & signature.actions):
        report.append(f"name '{name}' declared both as fluent and action")
    if not signature.fluents:
        report.append("empty fluent set")

    for name in sorted(source.defaults - signature.fluents):
        report.append(f"default '{name}' is not a declared fluent")

    for law in source.description.sorted_laws:
        if any(c.is_proper for c in law.conditions):
            report.append(f"proper extended literal in conditions of '{law}'")
        if isinstance(law, StateConstraint):
            if law.head.is_proper:
                report.append(
                    f"proper extended literal in state constraint '{law}'"
                )
            if not law.conditions:
                report.append(f"state constraint without conditions '{law}'")
        if isinstance(law, ExecutabilityCondition) and not law.conditions:
            report.append(
                f"executability condition without conditions '{law}'"
            )
        fluents, actions = _law_symbols(law)
        for name in sorted(set(fluents) - signature.fluents):
            report.append(f"unknown fluent '{name}' in law '{law}'")
        for name in sorted(set(actions) - signature.actions):
            report.append(f"unknown action '{name}' in law '{law}'")

    if not is_consistent(source.initial):
        report.append("inconsistent initial set")
    for literal in sorted(source.initial):
        if literal.is_proper:
            report.append(f"proper extended literal '{literal}' in initial set")
        if literal.fluent not in signature.fluents:
            report.append(f"unknown fluent '{literal.fluent}' in initial set")

    for step, action in enumerate(source.sequence):
        if not action:
            report.append(f"empty action at step {step}")
        for name in sorted(action - signature.actions):
            report.append(f"unknown action '{name}' at step {step}")

    return report
