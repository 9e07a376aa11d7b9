import unittest

from hypothesis import given, reject, settings
from hypothesis import strategies as st

from acir.functions.core_types import (
    ActionDescription,
    DynamicLaw,
    ExecutabilityCondition,
    Signature,
    StateConstraint,
    negative,
    positive,
    unknown,
)
from acir.functions.dsl_parser import read_source
from acir.functions.initial_state import source_completion
from acir.functions.transition import (
    CapExceeded,
    EmergentNonDeterminism,
    Path,
    PlusMinus,
    QualifiedStep,
    StateSet,
    all_states,
    branching_degree,
    branching_set,
    check_emergent_nondeterminism,
    closure,
    direct_effects,
    entails,
    exists_path,
    expansion,
    is_state,
    join,
    models,
    paths_to_dot,
    successors,
    unqualified,
)
from acir.functions.utils import params_path
from tests.oracles import oracle_models, powerset, qualified_extensions
from tests.strategies import FLUENTS, sources


def state(*literals):
    return StateSet.from_literals(literals)


class TestEffects(unittest.TestCase):
    def setUp(self):
        self.ex4 = read_source(params_path("ex4.acir")).source
        self.married = state(positive("m"), negative("ab"))

    def test_a_closure(self):
        constraints = [StateConstraint(positive("q"), [positive("p")])]
        self.assertEqual(
            closure([positive("p")], constraints), {positive("p"), positive("q")}
        )
        self.assertEqual(closure([negative("p")], constraints), {negative("p")})
        self.assertIsNone(closure([positive("p"), negative("q")], constraints))
        self.assertIsNone(closure([positive("p"), unknown("p")], []))

    def test_b_join(self):
        p, q, r, s = (positive(x) for x in "pqrs")
        joined = join([frozenset({p}), frozenset({q})], [r, negative("r")])
        self.assertEqual(
            joined,
            {
                frozenset({p, r}),
                frozenset({p, negative("r")}),
                frozenset({q, r}),
                frozenset({q, negative("r")}),
            },
        )
        twice = join(join([frozenset({p, q})], [r, negative("r")]), [s, negative("s")])
        self.assertEqual(len(twice), 4)
        self.assertTrue(all({p, q} < member for member in twice))
        self.assertEqual(join([frozenset({p})], [q]), {frozenset({p, q})})
        self.assertEqual(join([frozenset({p})], []), frozenset())

    def test_c_expansion_of_unknown_effect(self):
        sets = expansion({"fd"}, self.married, self.ex4.description)
        self.assertEqual(
            set(sets),
            {
                frozenset({positive("m")}),
                frozenset({negative("m")}),
                frozenset({unknown("m")}),
            },
        )
        self.assertEqual(expansion({"d"}, self.married, self.ex4.description), [frozenset()])


class TestSuccessors(unittest.TestCase):
    def setUp(self):
        self.ex4 = read_source(params_path("ex4.acir")).source
        self.married = state(positive("m"), negative("ab"))
        self.divorced = state(negative("m"), negative("ab"))
        self.unknown = state(unknown("m"), negative("ab"))

    def test_a_qualifiers(self):
        description = self.ex4.description
        self.assertEqual(
            set(successors(self.married, {"fd"}, description)),
            {self.married, self.divorced, self.unknown},
        )
        self.assertEqual(
            successors(self.married, {"fd"}, description, ()), [self.unknown]
        )
        self.assertEqual(
            set(successors(self.married, {"fd"}, description, {"m"})),
            {self.married, self.divorced},
        )
        self.assertEqual(successors(self.married, {"fd"}, description, {"ab"}), [])

    def test_b_not_executable(self):
        description = self.ex4.description
        self.assertEqual(successors(self.married, {"d"}, description), [])
        self.assertEqual(successors(self.divorced, {"fd"}, description), [])
        self.assertEqual(successors(self.divorced, {"w"}, description), [self.married])

    def test_c_branching_set(self):
        description = self.ex4.description
        self.assertEqual(
            branching_set(self.married, {"fd"}, self.divorced, description), {"m"}
        )
        self.assertEqual(
            branching_set(self.married, {"fd"}, self.unknown, description), frozenset()
        )

    def test_d_unknown_value_is_kept_by_inertia(self):
        description = self.ex4.description
        self.assertEqual(successors(self.unknown, {"d"}, description), [self.unknown])

    def test_e_concurrent_effects_resolved_by_constraints(self):
        description = ActionDescription(
            [
                DynamicLaw("a", positive("p")),
                StateConstraint(positive("q"), [positive("p")]),
            ]
        )
        start = state(negative("p"), negative("q"))
        self.assertEqual(
            successors(start, {"a"}, description),
            [state(positive("p"), positive("q"))],
        )


class TestModels(unittest.TestCase):
    def setUp(self):
        self.s1 = read_source(params_path("ex1_s1.acir")).source
        self.s2 = read_source(params_path("ex1_s2.acir")).source

    def test_a_executability_filters_models(self):
        states = source_completion(self.s1, {"m"}).states
        self.assertEqual(len(states), 2)
        paths = models(states, unqualified(self.s1.sequence), self.s1.description)
        self.assertEqual(len(paths), 1)
        self.assertTrue(entails(paths[0], negative("m")))
        self.assertTrue(entails(paths[0], PlusMinus("m")))

    def test_b_uninformative_action(self):
        states = source_completion(self.s2, {"m"}).states
        paths = models(states, unqualified(self.s2.sequence), self.s2.description)
        self.assertEqual(len(paths), 2)
        self.assertTrue(all(entails(p, PlusMinus("m")) for p in paths))
        unforced = source_completion(self.s2, ()).states
        paths = models(unforced, unqualified(self.s2.sequence), self.s2.description)
        self.assertEqual(len(paths), 1)
        self.assertFalse(entails(paths[0], PlusMinus("m")))

    def test_c_empty_sequence(self):
        states = source_completion(self.s1, {"m"}).states
        paths = models(states, (), self.s1.description)
        self.assertEqual(sorted(p.states for p in paths), sorted((s,) for s in states))

    def test_d_exists_path(self):
        self.assertTrue(
            exists_path(source_completion(self.s1, {"m"}).states, self.s1.sequence,
                        self.s1.description)
        )
        married = state(positive("m"), negative("ab"))
        self.assertFalse(exists_path([married], self.s1.sequence, self.s1.description))

    def test_e_dot_output(self):
        ex4 = read_source(params_path("ex4.acir")).source
        sequence = (
            QualifiedStep({"d"}),
            QualifiedStep({"w"}),
            QualifiedStep({"fd"}, {"m"}),
        )
        self.assertEqual(branching_degree(sequence), 1)
        start = state(negative("m"), negative("ab"))
        paths = models([start], sequence, ex4.description)
        self.assertEqual(len(paths), 2)
        dot = paths_to_dot(paths, ex4.description)
        self.assertTrue(dot.startswith("digraph transitions {"))
        self.assertIn("rankdir=LR;", dot)
        self.assertIn('label="fd / {m}"', dot)
        self.assertIn('label="w / {}"', dot)
        self.assertEqual(str(paths[0]), "<{-ab, -m}, d, {-ab, -m}, w, {m, -ab}, fd, {m, -ab}>")

    @settings(max_examples=500, deadline=None)
    @given(sources(constraints=False))
    def test_f_models_follow_qualifiers(self, source):
        states = source_completion(source, source.fluents).states
        for sequence in qualified_extensions(source):
            for path in models(states, sequence, source.description):
                self.assertIsInstance(path, Path)
                for i, step in enumerate(sequence):
                    beta = branching_set(
                        path.states[i], step.action, path.states[i + 1],
                        source.description,
                    )
                    self.assertEqual(beta, step.qualifier)

    @settings(max_examples=500, deadline=None)
    @given(sources(constraints=False))
    def test_g_unrestricted_successors_are_the_union(self, source):
        for start in source_completion(source, source.fluents).states:
            for action in source.sequence:
                effects = {
                    law.consequence.fluent
                    for law in source.description.dynamic_laws
                    if law.action in action and law.consequence.is_proper
                }
                union = set()
                for qualifier in powerset(effects):
                    union.update(successors(start, action, source.description, qualifier))
                self.assertEqual(set(successors(start, action, source.description)), union)

    @settings(max_examples=500, deadline=None)
    @given(sources(), st.data())
    def test_h_qualifier_without_unknown_effect_has_no_model(self, source, data):
        step = data.draw(st.integers(0, len(source.sequence) - 1))
        effects = {
            law.consequence.fluent
            for law in source.description.dynamic_laws
            if law.action in source.sequence[step] and law.consequence.is_proper
        }
        outside = [f for f in FLUENTS if f not in effects]
        if not outside:
            return
        extra = data.draw(st.sampled_from(outside))
        sequence = list(unqualified(source.sequence))
        sequence[step] = QualifiedStep(sequence[step].action, {extra} | effects)
        states = source_completion(source, source.fluents).states
        try:
            found = models(states, tuple(sequence), source.description)
        except EmergentNonDeterminism:
            reject()
        self.assertEqual(found, [])

    @settings(max_examples=500, deadline=None)
    @given(sources(unknown_effects=False))
    def test_i_definite_effects_give_at_most_one_model(self, source):
        sequence = unqualified(source.sequence)
        for start in source_completion(source, source.fluents).states:
            try:
                found = models([start], sequence, source.description)
            except EmergentNonDeterminism:
                reject()
            self.assertLessEqual(len(found), 1)


class TestEmergentNonDeterminism(unittest.TestCase):
    def setUp(self):
        self.description = ActionDescription(
            [
                StateConstraint(positive("q"), [negative("r"), positive("p")]),
                StateConstraint(positive("r"), [negative("q"), positive("p")]),
                DynamicLaw("a", positive("p")),
            ]
        )
        self.signature = Signature({"p", "q", "r"}, {"a"})
        self.start = state(negative("p"), negative("q"), negative("r"))

    # Negative test case
    # Two solutions for a single effect set
    def test_a_successors_raise(self):
        with self.assertRaises(EmergentNonDeterminism) as context:
            successors(self.start, {"a"}, self.description)
        self.assertEqual(len(context.exception.successors), 2)
        self.assertEqual(context.exception.details()["action"], ["a"])

    def test_b_check_reports_witness(self):
        witnesses = check_emergent_nondeterminism(self.description, self.signature)
        starts = {w.state for w in witnesses}
        self.assertIn(self.start, starts)
        witness = next(w for w in witnesses if w.state == self.start)
        self.assertEqual(
            set(witness.successors),
            {
                state(positive("p"), positive("q"), negative("r")),
                state(positive("p"), negative("q"), positive("r")),
            },
        )

    def test_c_clean_description(self):
        ex4 = read_source(params_path("ex4.acir")).source
        self.assertEqual(
            check_emergent_nondeterminism(ex4.description, ex4.signature), []
        )

    # Negative test case
    # Signature too large to enumerate
    def test_d_cap(self):
        signature = Signature({f"f{i}" for i in range(15)}, {"a"})
        with self.assertRaises(CapExceeded):
            check_emergent_nondeterminism(ActionDescription(), signature)
        description = ActionDescription([ExecutabilityCondition("a", [positive("f0")])])
        small = Signature({"f0", "f1"}, {"a"})
        self.assertEqual(check_emergent_nondeterminism(description, small, 2), [])


class TestWorkedExamples(unittest.TestCase):
    def setUp(self):
        # e1 sets f1 and has an unknown effect on f2; f3 follows f1
        self.description = ActionDescription(
            [
                DynamicLaw("e1", positive("f1")),
                DynamicLaw("e1", unknown("f2")),
                StateConstraint(positive("f3"), [positive("f1")]),
            ]
        )
        self.start = state(negative("f1"), negative("f2"), negative("f3"))
        self.options = {
            state(positive("f1"), unknown("f2"), positive("f3")): frozenset(),
            state(positive("f1"), positive("f2"), positive("f3")): {"f2"},
            state(positive("f1"), negative("f2"), positive("f3")): {"f2"},
        }

    def test_a_expansion_has_three_options(self):
        self.assertEqual(
            set(expansion({"e1"}, self.start, self.description)),
            {
                frozenset({positive("f1"), unknown("f2")}),
                frozenset({positive("f1"), positive("f2")}),
                frozenset({positive("f1"), negative("f2")}),
            },
        )
        self.assertEqual(
            closure([positive("f1")], self.description.state_constraints),
            {positive("f1"), positive("f3")},
        )

    def test_b_each_option_has_its_successor(self):
        found = successors(self.start, {"e1"}, self.description)
        self.assertEqual(set(found), set(self.options))
        for successor, beta in self.options.items():
            self.assertEqual(
                branching_set(self.start, {"e1"}, successor, self.description), beta
            )
        self.assertEqual(
            successors(self.start, {"e1"}, self.description, ()),
            [state(positive("f1"), unknown("f2"), positive("f3"))],
        )

    def test_c_qualified_sequences(self):
        description = ActionDescription(
            [
                DynamicLaw("a1", negative("g"), [positive("g")]),
                DynamicLaw("a2", unknown("f"), [negative("g")]),
            ]
        )
        start = state(negative("f"), positive("g"))
        s1 = (QualifiedStep({"a1"}), QualifiedStep({"a2"}))
        s2 = (QualifiedStep({"a1"}), QualifiedStep({"a2"}, {"f"}))
        self.assertEqual((branching_degree(s1), branching_degree(s2)), (0, 1))
        (only,) = models([start], s1, description)
        self.assertEqual(
            only.states,
            (start, state(negative("f"), negative("g")), state(unknown("f"), negative("g"))),
        )
        finals = {path.final for path in models([start], s2, description)}
        self.assertEqual(
            finals,
            {state(positive("f"), negative("g")), state(negative("f"), negative("g"))},
        )
        self.assertEqual(branching_degree(()), 0)

    def test_d_missing_completion(self):
        constraints = [StateConstraint(negative("q"), [positive("p")])]
        self.assertIsNone(closure([positive("p"), positive("q")], constraints))
        self.assertIn(unknown("f"), closure([unknown("f")], constraints))


class TestAgainstOracle(unittest.TestCase):
    @settings(max_examples=500, deadline=None)
    @given(sources())
    def test_a_models_match_enumeration(self, source):
        states = source_completion(source, source.fluents).states
        for sequence in qualified_extensions(source)[:4]:
            try:
                found = models(states, sequence, source.description)
            except EmergentNonDeterminism:
                reject()
            expected = oracle_models(states, sequence, source.description, source.fluents)
            self.assertEqual({(p.states, p.actions) for p in found}, expected)

    @settings(max_examples=500, deadline=None)
    @given(sources())
    def test_b_successors_are_states(self, source):
        for start in all_states(source.signature, source.description):
            for action in set(source.sequence):
                try:
                    found = successors(start, action, source.description)
                except EmergentNonDeterminism:
                    reject()
                for successor in found:
                    self.assertTrue(
                        is_state(successor.literals, source.signature, source.description)
                    )
                    beta = branching_set(start, action, successor, source.description)
                    effects = direct_effects(action, start, source.description)
                    self.assertTrue(all(unknown(f) in effects for f in beta))


if __name__ == "__main__":
    unittest.main()
