import importlib.util
import os
import tempfile
import unittest

from acir.functions.asp_emitter import (
    COMPLETION,
    CONSISTENCY,
    INERTIA,
    emit_for_findmatch_stage,
    emit_program,
    write_program,
)
from acir.functions.core_types import Truth, negative, positive
from acir.functions.dsl_parser import read_source
from acir.functions.initial_state import completion_set, source_expansion
from acir.functions.matcher import qualifier_pool
from acir.functions.transition import QualifiedStep, StateSet, models, unqualified
from acir.functions.utils import params_path

HAS_CLINGO = importlib.util.find_spec("clingo") is not None
GOLDEN = os.path.join(os.path.dirname(__file__), "test_data", "asp")
FIXTURES = ("ex1_s1", "ex1_s2", "ex2", "ex3", "ex4")


def load(name):
    return read_source(params_path(f"{name}.acir")).source


class TestEmitProgram(unittest.TestCase):
    def setUp(self):
        self.source = load("ex1_s1")
        self.program = emit_program(
            self.source, {"m"}, unqualified(self.source.sequence), ()
        )

    def test_a_golden_text(self):
        expected = [
            "% source: ex1_s1",
            "% forced: {m}",
            "% sequence: <d/{}>",
            "% horizon: 2",
            "fluent(ab).",
            "fluent(m).",
            "step(0).",
            "step(1).",
            "default(ab).",
            "forced(m).",
            "occurs(d,0).",
            ":- occurs(d,I), holds(m,I), -holds(ab,I), step(I).",
            *CONSISTENCY,
            *INERTIA,
            *COMPLETION,
        ]
        self.assertEqual(self.program.text, "\n".join(expected) + "\n")
        self.assertEqual(self.program.horizon, 2)

    def test_b_axiom_counts(self):
        stats = self.program.stats
        self.assertEqual(
            (stats["consistency"], stats["inertia"], stats["completion"]), (2, 3, 6)
        )
        self.assertEqual(stats["laws"], 1)
        self.assertEqual(stats["facts"], 7)

    def test_c_unknown_effects_and_initial_literals(self):
        source = load("ex4")
        sequence = (
            QualifiedStep({"d"}),
            QualifiedStep({"w"}),
            QualifiedStep({"fd"}, {"m"}),
        )
        program = emit_program(source, (), sequence, {negative("m")})
        rules = program.rules
        self.assertIn("-init(m).", rules)
        self.assertIn("split(m,2).", rules)
        self.assertIn("holds(m,I+1) :- occurs(w,I).", rules)
        self.assertIn("u(m,I+1) :- occurs(fd,I), not split(m,I).", rules)
        self.assertIn("holds(m,I+1) | -holds(m,I+1) :- occurs(fd,I), split(m,I).", rules)
        self.assertIn(":- occurs(fd,I), -holds(m,I), step(I).", rules)
        self.assertEqual(program.horizon, 4)

    # Negative test case
    # Only sources are emitted
    def test_d_type_negative(self):
        with self.assertRaises(TypeError):
            emit_program("ex1_s1", (), ())


class TestStages(unittest.TestCase):
    def setUp(self):
        self.source = load("ex1_s1")

    def test_a_expansion_stage(self):
        rules = emit_for_findmatch_stage(self.source, "expansion").rules
        self.assertIn("forced(m).", rules)
        self.assertNotIn("forced(ab).", rules)
        self.assertIn("split(ab,0).", rules)
        self.assertIn("split(m,0).", rules)

    def test_b_candidate_stage(self):
        program = emit_for_findmatch_stage(
            self.source, "c1", forced={"m"}, initial={negative("m")}
        )
        self.assertIn("forced(m).", program.rules)
        self.assertIn("-init(m).", program.rules)
        self.assertIn("occurs(d,0).", program.rules)

    def test_c_comparison_stage(self):
        program = emit_for_findmatch_stage(self.source, "c2", initial={negative("ab")})
        self.assertEqual(program.horizon, 1)
        self.assertIn("-init(ab).", program.rules)
        self.assertFalse(any(rule.startswith("occurs(") for rule in program.rules))

    # Negative test case
    # Unknown stage
    def test_d_stage_negative(self):
        with self.assertRaises(ValueError):
            emit_for_findmatch_stage(self.source, "c3")

    def test_e_write_program(self):
        program = emit_for_findmatch_stage(self.source, "expansion")
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "asp", "ex1_s1.lp")
            write_program(program, path)
            with open(path, encoding="utf-8") as handle:
                self.assertEqual(handle.read(), program.text)
            with self.assertRaises(FileExistsError):
                write_program(program, path, rewrite=False)


class TestGoldenFiles(unittest.TestCase):
    def stage_program(self, source, stage):
        if stage == "c1":
            return emit_for_findmatch_stage(
                source, stage, initial=source_expansion(source)
            )
        return emit_for_findmatch_stage(source, stage)

    def test_a_every_fixture_and_stage(self):
        for name in FIXTURES:
            source = load(name)
            for stage in ("expansion", "c1", "c2"):
                with self.subTest(source=name, stage=stage):
                    path = os.path.join(GOLDEN, f"{name}_{stage}.lp")
                    with open(path, encoding="utf-8", newline="") as handle:
                        expected = handle.read()
                    self.assertEqual(self.stage_program(source, stage).text, expected)

    def test_b_written_file_is_byte_identical(self):
        source = load("ex4")
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "ex4_expansion.lp")
            write_program(self.stage_program(source, "expansion"), path)
            with open(path, "rb") as written, open(
                os.path.join(GOLDEN, "ex4_expansion.lp"), "rb"
            ) as golden:
                self.assertEqual(written.read(), golden.read())


def decode(symbols, horizon):
    """States encoded by the holds/2 and u/2 atoms of an answer set."""
    states = [{} for _ in range(horizon)]
    for atom in symbols:
        if atom.name not in ("holds", "u") or len(atom.arguments) != 2:
            continue
        fluent, time = atom.arguments[0].name, atom.arguments[1].number
        if atom.name == "u":
            value = Truth.UNKNOWN
        else:
            value = Truth.FALSE if atom.negative else Truth.TRUE
        states[time][fluent] = value
    return tuple(StateSet.from_mapping(state) for state in states)


def native_paths(source, initial, forced, sequence):
    states = completion_set(
        initial, forced, source.description, source.defaults, source.fluents
    ).states
    return {path.states for path in models(states, sequence, source.description)}


def split_sequence(source):
    # the u() laws of the fixtures are unconditional, so splitting every
    # fluent splits exactly the pool
    qualifiers = [set() for _ in source.sequence]
    for step, fluent in qualifier_pool(source):
        qualifiers[step].add(fluent)
    return tuple(
        QualifiedStep(action, qualifier)
        for action, qualifier in zip(source.sequence, qualifiers)
    )


@unittest.skipUnless(HAS_CLINGO, "clingo is not installed")
class TestAnswerSets(unittest.TestCase):
    def count_answer_sets(self, program):
        import clingo

        control = clingo.Control(["0"])
        control.add("base", [], program.text)
        control.ground([("base", [])])
        found = []
        control.solve(on_model=lambda model: found.append(model.symbols(atoms=True)))
        return found

    def answer_paths(self, program):
        return {
            decode(symbols, program.horizon)
            for symbols in self.count_answer_sets(program)
        }

    def test_a_split_gives_two_answer_sets(self):
        source = load("ex4")
        sequence = (
            QualifiedStep({"d"}),
            QualifiedStep({"w"}),
            QualifiedStep({"fd"}, {"m"}),
        )
        program = emit_program(source, (), sequence, {negative("m")})
        self.assertEqual(len(self.count_answer_sets(program)), 2)

    def test_b_unknown_effect_gives_one_answer_set(self):
        source = load("ex4")
        program = emit_program(source, (), unqualified(source.sequence), {negative("m")})
        answers = self.count_answer_sets(program)
        self.assertEqual(len(answers), 1)
        self.assertIn("u(m,3)", {str(atom) for atom in answers[0]})

    def test_c_impossible_sequence_has_no_answer_set(self):
        source = load("ex1_s1")
        program = emit_program(source, {"m"}, unqualified(source.sequence), ())
        self.assertEqual(len(self.count_answer_sets(program)), 1)
        program = emit_program(
            source, (), unqualified(source.sequence), {positive("m")}
        )
        self.assertEqual(len(self.count_answer_sets(program)), 0)

    def test_d_answer_sets_encode_the_models(self):
        witness = (
            QualifiedStep({"d"}),
            QualifiedStep({"w"}),
            QualifiedStep({"fd"}, {"m"}),
        )
        for name in FIXTURES:
            source = load(name)
            expansion = source_expansion(source)
            cases = [
                (expansion, (), unqualified(source.sequence)),
                ((), {"m"}, unqualified(source.sequence)),
                ({negative("ab")}, (), ()),
            ]
            if name == "ex4":
                cases.append((expansion, (), witness))
            for initial, forced, sequence in cases:
                with self.subTest(source=name, forced=forced, steps=len(sequence)):
                    program = emit_program(source, forced, sequence, initial)
                    self.assertEqual(
                        self.answer_paths(program),
                        native_paths(source, initial, forced, sequence),
                    )

    def test_e_expansion_stage_models(self):
        for name in FIXTURES:
            source = load(name)
            with self.subTest(source=name):
                program = emit_for_findmatch_stage(source, "expansion")
                self.assertEqual(
                    self.answer_paths(program),
                    native_paths(
                        source,
                        source.initial,
                        source.non_default_fluents,
                        split_sequence(source),
                    ),
                )

    def test_f_intersection_of_answer_sets_is_the_expansion(self):
        for name in FIXTURES:
            source = load(name)
            with self.subTest(source=name):
                answers = self.count_answer_sets(
                    emit_for_findmatch_stage(source, "expansion")
                )
                shared = set.intersection(*({str(a) for a in s} for s in answers))
                derived = set(source.initial)
                for fluent in source.non_default_fluents:
                    if f"forced({fluent})" not in shared:
                        continue
                    if f"holds({fluent},0)" in shared:
                        derived.add(positive(fluent))
                    if f"-holds({fluent},0)" in shared:
                        derived.add(negative(fluent))
                self.assertEqual(derived, source_expansion(source))


if __name__ == "__main__":
    unittest.main()
