"""Module with the transition semantics of the action language.

A state assigns every fluent one of true, false or unknown. Successor
states are the solutions of the expanded successor-state equation

    s' = Cn_Z(W + (s * s'))   for some W in the expansion of E(a, s),

where '*' keeps the literals preserved by inertia. The equation is
solved by enumerating which fluents change value: a fluent contradicted
by W must change, a fluent fixed by W must not, and any other fluent
can only change if some state constraint has it in the head. Each
candidate is closed under the constraints and checked exactly.

This file can also be imported as a module and contains the following
functions:

    * closure - consequences Cn_Z(S) of a set of extended literals under
    state constraints, None if inconsistent.

    * direct_effects - set E(a, s) of direct effects of an action.

    * join - the join of a collection of literal sets with a set of
    alternatives.

    * expansion - all effect sets obtained by optionally replacing each
    u(f) effect with f or -f.

    * executable - check the executability conditions of an action.

    * successors - successor states of a state under an action, optionally
    restricted to a qualifier.

    * branching_set - fluents of a transition where reasoning by cases
    was applied.

    * models - all paths of a qualified action sequence from a set of
    initial states.

    * exists_path - check that an action sequence can be executed from
    one of the given states under any qualifiers.

    * entails - entailment of a fluent literal or of +-f by the last
    state of a path.

    * branching_degree - total size of the qualifiers of a sequence.

    * check_emergent_nondeterminism - enumerate all states and singleton
    actions looking for multiple solutions of the classical
    successor-state equation.

    * paths_to_dot - render a set of paths as a DOT graph.

"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache, total_ordering
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from acir.functions.core_types import (
    Action,
    ActionDescription,
    AcirError,
    Literal,
    Signature,
    StateConstraint,
    Truth,
    format_action,
    format_literals,
    negative,
    positive,
    unknown,
)

logger = logging.getLogger(__name__)


class EmergentNonDeterminism(AcirError):
    """A single effect set admits several successor states."""

    def __init__(self, state, action, effects, successors=()):
        self.state = state
        self.action = frozenset(action)
        self.effects = frozenset(effects)
        self.successors = tuple(successors)
        super().__init__(
            f"emergent non-determinism: action {format_action(self.action)} "
            f"in state {state} with effects {format_literals(self.effects)} "
            f"has {len(self.successors)} successor states"
        )

    def details(self) -> dict:
        return {
            "state": str(self.state),
            "action": sorted(self.action),
            "effects": sorted(str(lit) for lit in self.effects),
        }


class CapExceeded(AcirError, ValueError):
    """The signature is too large for state enumeration."""

    def __init__(self, fluents: int, cap: int):
        self.fluents = fluents
        self.cap = cap
        super().__init__(
            f"{fluents} fluents exceed the state enumeration cap of {cap}"
        )

    def details(self) -> dict:
        return {"fluents": self.fluents, "cap": self.cap}


@total_ordering
@dataclass(frozen=True)
class StateSet:
    """Complete assignment of the signature's fluents.

    Stored as a tuple of (fluent, value) pairs sorted by fluent name.
    """

    assignment: Tuple[Tuple[str, Truth], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Truth]) -> "StateSet":
        return cls(tuple(sorted(mapping.items())))

    @classmethod
    def from_literals(cls, literals: Iterable[Literal]) -> "StateSet":
        mapping = to_assignment(literals)
        if mapping is None:
            raise ValueError("inconsistent set of literals")
        return cls.from_mapping(mapping)

    @cached_property
    def as_dict(self) -> Dict[str, Truth]:
        return dict(self.assignment)

    @cached_property
    def literals(self) -> FrozenSet[Literal]:
        return frozenset(Literal(f, v) for f, v in self.assignment)

    def value(self, fluent: str) -> Truth:
        return self.as_dict[fluent]

    def __contains__(self, literal: Literal) -> bool:
        return self.as_dict.get(literal.fluent) is literal.value

    def __lt__(self, other: "StateSet") -> bool:
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.assignment < other.assignment

    def __str__(self) -> str:
        return format_literals(self.literals)


@dataclass(frozen=True)
class QualifiedStep:
    """An action paired with the fluents to reason by cases about."""

    action: Action
    qualifier: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "action", frozenset(self.action))
        object.__setattr__(self, "qualifier", frozenset(self.qualifier))

    def __str__(self) -> str:
        return (
            f"{format_action(self.action)}/"
            "{" + ", ".join(sorted(self.qualifier)) + "}"
        )


QualifiedActionSequence = Tuple[QualifiedStep, ...]


def unqualified(sequence: Sequence[Action]) -> QualifiedActionSequence:
    """Extension of a sequence with all qualifiers empty."""
    return tuple(QualifiedStep(action) for action in sequence)


def fully_qualified(
    sequence: Sequence[Action], fluents: Iterable[str]
) -> QualifiedActionSequence:
    """Extension of a sequence with every qualifier equal to all fluents."""
    everything = frozenset(fluents)
    return tuple(QualifiedStep(action, everything) for action in sequence)


def format_sequence(sequence: QualifiedActionSequence) -> str:
    return "<" + ", ".join(str(step) for step in sequence) + ">"


@dataclass(frozen=True)
class Path:
    """Alternating sequence of states and actions."""

    states: Tuple[StateSet, ...]
    actions: Tuple[Action, ...] = ()

    @property
    def initial(self) -> StateSet:
        return self.states[0]

    @property
    def final(self) -> StateSet:
        return self.states[-1]

    def extend(self, action: Action, state: StateSet) -> "Path":
        return Path(self.states + (state,), self.actions + (action,))

    def sort_key(self):
        return (
            tuple(s.assignment for s in self.states),
            tuple(tuple(sorted(a)) for a in self.actions),
        )

    def __str__(self) -> str:
        parts = [str(self.states[0])]
        for action, state in zip(self.actions, self.states[1:]):
            parts.extend([format_action(action), str(state)])
        return "<" + ", ".join(parts) + ">"


@dataclass(frozen=True)
class PlusMinus:
    """Target +-f: the fluent is known, either true or false."""

    fluent: str


@dataclass(frozen=True)
class NonDeterminismWitness:
    state: StateSet
    action: Action
    successors: Tuple[StateSet, ...]


def to_assignment(literals: Iterable[Literal]) -> Optional[Dict[str, Truth]]:
    mapping = {}
    for literal in literals:
        if mapping.setdefault(literal.fluent, literal.value) is not literal.value:
            return None
    return mapping


def close_assignment(
    mapping: Dict[str, Truth], constraints: Sequence[StateConstraint]
) -> Optional[Dict[str, Truth]]:
    result = dict(mapping)
    changed = True
    while changed:
        changed = False
        for constraint in constraints:
            if all(result.get(c.fluent) is c.value for c in constraint.conditions):
                head = constraint.head
                current = result.get(head.fluent)
                if current is None:
                    result[head.fluent] = head.value
                    changed = True
                elif current is not head.value:
                    return None
    return result


def closure(
    literals: Iterable[Literal], constraints: Iterable[StateConstraint]
) -> Optional[FrozenSet[Literal]]:
    """Compute the consequences of a set of literals under constraints.

    Parameters
    ----------
    literals : Iterable[Literal]
        Set S of extended literals.
    constraints : Iterable[StateConstraint]
        State constraints Z.

    Returns
    -------
    FrozenSet[Literal] or None
        Smallest superset of S closed under Z, or None if some fluent
        receives two of f, -f, u(f).
    """
    mapping = to_assignment(literals)
    if mapping is None:
        return None
    closed = close_assignment(mapping, tuple(constraints))
    if closed is None:
        return None
    return frozenset(Literal(f, v) for f, v in closed.items())


def direct_effects(
    action: Action, state: StateSet, description: ActionDescription
) -> FrozenSet[Literal]:
    """Return E(a, s): consequences of the applicable dynamic laws."""
    return frozenset(
        law.consequence
        for law in description.dynamic_laws
        if law.action in action and all(c in state for c in law.conditions)
    )


def join(
    sets: Iterable[FrozenSet[Literal]], alternatives: Iterable[Literal]
) -> FrozenSet[FrozenSet[Literal]]:
    """Return {A_i + {b} | A_i in sets, b in alternatives}."""
    alternatives = tuple(alternatives)
    return frozenset(
        frozenset(member) | {choice}
        for member in sets
        for choice in alternatives
    )


def _expand(effects: FrozenSet[Literal]) -> List[FrozenSet[Literal]]:
    result = {frozenset(lit for lit in effects if not lit.is_proper)}
    for fluent in sorted({lit.fluent for lit in effects if lit.is_proper}):
        result = join(
            result, (positive(fluent), negative(fluent), unknown(fluent))
        )
    return sorted(result, key=sorted)


def expansion(
    action: Action, state: StateSet, description: ActionDescription
) -> List[FrozenSet[Literal]]:
    """Return the expansion of E(a, s).

    The deterministic part of the effects is joined, for every fluent f
    with u(f) among the effects, with the alternatives f, -f and u(f).

    Returns
    -------
    List[FrozenSet[Literal]]
        The effect sets, sorted for a deterministic order.
    """
    return _expand(direct_effects(action, state, description))


def executable(
    action: Action, state: StateSet, description: ActionDescription
) -> bool:
    """Check that no executability condition of the action holds."""
    return not any(
        law.action in action and all(c in state for c in law.conditions)
        for law in description.executability_conditions
    )


def _fixpoints(
    state: StateSet,
    effects: Iterable[Literal],
    description: ActionDescription,
) -> List[StateSet]:
    effects = to_assignment(effects)
    if effects is None:
        return []
    sigma = state.as_dict
    constraints = description.state_constraints

    head_values: Dict[str, set] = {}
    for constraint in constraints:
        head_values.setdefault(constraint.head.fluent, set()).add(
            constraint.head.value
        )

    mandatory = {f for f, v in effects.items() if sigma.get(f) is not v}
    optional = sorted(
        f
        for f in sigma
        if f not in effects
        and any(v is not sigma[f] for v in head_values.get(f, ()))
    )

    found = []
    for size in range(len(optional) + 1):
        for extra in itertools.combinations(optional, size):
            changed = mandatory.union(extra)
            kernel = dict(effects)
            for fluent, value in sigma.items():
                if fluent not in changed:
                    kernel[fluent] = value
            closed = close_assignment(kernel, constraints)
            if closed is None or len(closed) != len(sigma):
                continue
            # the fluents that change must not end up preserved by inertia
            if any(closed[f] is sigma[f] for f in changed):
                continue
            found.append(StateSet.from_mapping(closed))
    return found


def _split_fluents(
    effect_set: FrozenSet[Literal], unknown_fluents: Iterable[str]
) -> FrozenSet[str]:
    return frozenset(f for f in unknown_fluents if unknown(f) not in effect_set)


@lru_cache(maxsize=1 << 16)
def _successors(
    state: StateSet,
    action: Action,
    description: ActionDescription,
    qualifier: Optional[FrozenSet[str]],
) -> Tuple[StateSet, ...]:
    if not executable(action, state, description):
        return ()
    effects = direct_effects(action, state, description)
    unknown_fluents = {lit.fluent for lit in effects if lit.is_proper}
    if qualifier is not None and not qualifier <= unknown_fluents:
        return ()

    found = set()
    for effect_set in _expand(effects):
        # the branching set of the resulting transition is exactly the
        # set of u(f) effects replaced by f or -f in effect_set
        if (
            qualifier is not None
            and _split_fluents(effect_set, unknown_fluents) != qualifier
        ):
            continue
        solutions = _fixpoints(state, effect_set, description)
        if len(solutions) > 1:
            raise EmergentNonDeterminism(state, action, effect_set, solutions)
        found.update(solutions)
    return tuple(sorted(found))


def successors(
    state: StateSet,
    action: Action,
    description: ActionDescription,
    qualifier: Optional[Iterable[str]] = None,
) -> List[StateSet]:
    """Compute the successor states of a state under an action.

    Parameters
    ----------
    state : StateSet
        Current state.
    action : Action
        Set of elementary actions.
    description : ActionDescription
        The action description.
    qualifier : Iterable[str], optional
        If given, only successors whose branching set equals the
        qualifier are returned. None stands for any qualifier.

    Returns
    -------
    List[StateSet]
        Sorted successor states; empty if the action is not executable.

    Raises
    ------
    EmergentNonDeterminism
        If one effect set admits several solutions of the equation.
    """
    if qualifier is not None:
        qualifier = frozenset(qualifier)
    return list(_successors(state, frozenset(action), description, qualifier))


def branching_set(
    state: StateSet,
    action: Action,
    successor: StateSet,
    description: ActionDescription,
) -> FrozenSet[str]:
    """Return {f | u(f) in E(a, s) and u(f) not in s'}."""
    return frozenset(
        lit.fluent
        for lit in direct_effects(action, state, description)
        if lit.is_proper and lit not in successor
    )


def models(
    states: Iterable[StateSet],
    sequence: QualifiedActionSequence,
    description: ActionDescription,
) -> List[Path]:
    """Return all models of [states, sequence].

    A model starts in one of the states and every transition has the
    step's qualifier as branching set. An empty sequence gives one
    single-state path per state.

    Returns
    -------
    List[Path]
        Models sorted by their states.
    """
    paths = [Path((state,)) for state in sorted(set(states))]
    for step in sequence:
        extended = []
        for path in paths:
            for nxt in successors(
                path.final, step.action, description, step.qualifier
            ):
                extended.append(path.extend(step.action, nxt))
        paths = extended
        if not paths:
            break
    return sorted(paths, key=Path.sort_key)


def exists_path(
    states: Iterable[StateSet],
    sequence: Sequence[Action],
    description: ActionDescription,
) -> bool:
    """Check that the sequence can be executed from one of the states.

    Qualifiers are unrestricted: every u(f) effect may be kept or split.
    """
    sequence = tuple(frozenset(a) for a in sequence)
    dead = set()

    def _search(state: StateSet, step: int) -> bool:
        if step == len(sequence):
            return True
        if (state, step) in dead:
            return False
        for nxt in successors(state, sequence[step], description):
            if _search(nxt, step + 1):
                return True
        dead.add((state, step))
        return False

    return any(_search(state, 0) for state in sorted(set(states)))


def entails(path: Path, target: Union[Literal, PlusMinus]) -> bool:
    """Check entailment by the last state of the path.

    A fluent literal is entailed if it belongs to the last state; +-f is
    entailed if f or -f does (u(f) does not).
    """
    if isinstance(target, PlusMinus):
        return path.final.value(target.fluent) is not Truth.UNKNOWN
    return target in path.final


def branching_degree(sequence: QualifiedActionSequence) -> int:
    return sum(len(step.qualifier) for step in sequence)


def is_state(
    literals: Iterable[Literal],
    signature: Signature,
    description: ActionDescription,
) -> bool:
    """Check completeness, consistency and closure of a literal set."""
    mapping = to_assignment(literals)
    if mapping is None or set(mapping) != set(signature.fluents):
        return False
    return close_assignment(mapping, description.state_constraints) == mapping


def all_states(
    signature: Signature, description: ActionDescription
) -> List[StateSet]:
    """Enumerate every state of the description over the signature."""
    fluents = signature.sorted_fluents
    states = []
    for values in itertools.product(tuple(Truth), repeat=len(fluents)):
        mapping = dict(zip(fluents, values))
        if close_assignment(mapping, description.state_constraints) == mapping:
            states.append(StateSet.from_mapping(mapping))
    return states


def check_emergent_nondeterminism(
    description: ActionDescription,
    signature: Signature,
    fluent_cap: int = 14,
) -> List[NonDeterminismWitness]:
    """Look for emergent non-deterministic behaviour.

    For every state and every singleton action executable in it, count
    the solutions of s' = Cn_Z(E(a, s) + (s * s')).

    Parameters
    ----------
    description : ActionDescription
        Action description to check.
    signature : Signature
        Signature whose states are enumerated.
    fluent_cap : int, optional
        Largest number of fluents for which the 3^n states are enumerated.
        The default is 14.

    Returns
    -------
    List[NonDeterminismWitness]
        Witnesses (state, action, successors); empty if the description
        is clean.

    Raises
    ------
    CapExceeded
        If the signature has more fluents than the cap.
    """
    if len(signature.fluents) > fluent_cap:
        raise CapExceeded(len(signature.fluents), fluent_cap)

    witnesses = []
    for state in all_states(signature, description):
        for name in sorted(signature.actions):
            action = frozenset({name})
            if not executable(action, state, description):
                continue
            effects = direct_effects(action, state, description)
            solutions = _fixpoints(state, effects, description)
            if len(solutions) > 1:
                witnesses.append(
                    NonDeterminismWitness(state, action, tuple(solutions))
                )
    if witnesses:
        logger.debug(
            "%d emergent non-determinism witnesses found", len(witnesses)
        )
    return witnesses


def paths_to_dot(
    paths: Iterable[Path], description: ActionDescription
) -> str:
    """Render the transitions of the given paths as a DOT digraph.

    Nodes are states labelled by their assignment, edges are labelled by
    the action and the branching set of the transition.
    """
    nodes: Dict[StateSet, str] = {}
    edges = set()
    for path in paths:
        for state in path.states:
            nodes.setdefault(state, f"s{len(nodes)}")
        for i, action in enumerate(path.actions):
            edges.add((path.states[i], action, path.states[i + 1]))

    lines = ["digraph transitions {", "  rankdir=LR;"]
    for state, name in nodes.items():
        lines.append(f'  {name} [label="{state}"];')
    for source, action, target in sorted(
        edges,
        key=lambda e: (nodes[e[0]], tuple(sorted(e[1])), nodes[e[2]]),
    ):
        beta = branching_set(source, action, target, description)
        label = format_action(action) + " / {" + ", ".join(sorted(beta)) + "}"
        lines.append(f'  {nodes[source]} -> {nodes[target]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
