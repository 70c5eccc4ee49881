"""Tests for artifact automata: patterns, otherwise, matching, text format."""

import random

import pytest

import corpus
import generators
from coopverify.automata import (
    ANY_EDGE,
    ArtifactAutomaton,
    AutomatonKind,
    EdgePattern,
    FinalEntry,
    Transition,
    accepts,
    all_runs,
    covers,
    initial_frontier,
    match_path,
    naive_match_path,
    otherwise_expansion,
    parse_automaton,
    serialize_automaton,
    step_frontier,
)
from coopverify.errors import DuplicateOtherwise, ParseError, UnknownKind
from coopverify.kinds import build_test_case_automaton
from coopverify.lang import CFAEdge, ConcreteDataState, ConcretePath, EMPTY_STATE, enumerate_paths
from coopverify.predicates import Interval, TRUE


def path_with_inputs(cfa, inputs, domain=Interval(-4, 4)):
    for path in enumerate_paths(cfa, domain, 200).paths:
        if path.inputs() == tuple(inputs):
            return path
    raise AssertionError(f"no maximal path with inputs {inputs}")


class TestEdgePattern:
    def test_01_concrete_pattern(self, p):
        pattern = EdgePattern(3, "a < x", 4)
        assert pattern.matches(corpus.program_p().edges[3])
        assert [pattern.matches(e) for e in p.edges].count(True) == 1

    def test_02_wildcards(self, p):
        assert all(ANY_EDGE.matches(e) for e in p.edges)
        assert [EdgePattern(3, None, None).matches(e) for e in p.edges].count(True) == 2

    def test_03_matching_uses_original_labels(self, p):
        """Relabeled edges (as produced by program transformations) still
        match patterns written against the original locations."""
        original = p.edges[0]
        moved = CFAEdge(7, original.op, 8, match_source=0, match_target=1)
        assert EdgePattern(0, original.op.text, 1).matches(moved)
        assert not EdgePattern(7, original.op.text, 8).matches(moved)

    def test_04_input_template_detection(self):
        assert EdgePattern(None, "chi = input()", None).is_input_template
        assert not EdgePattern(None, "int x = input()", None).is_input_template
        assert not ANY_EDGE.is_input_template


class TestOtherwiseExpansion:
    def test_01_enabled_when_assumption_fails(self, p):
        prop = corpus.prop()
        exit_edge = [e for e in p.edges if e.source == 3 and e.target == 6][0]
        state = ConcreteDataState({"a": 0, "b": 0, "x": 0})
        assert otherwise_expansion(prop, "q0", exit_edge, state)

    def test_02_disabled_when_explicit_fires(self, p):
        prop = corpus.prop()
        exit_edge = [e for e in p.edges if e.source == 3 and e.target == 6][0]
        state = ConcreteDataState({"a": 1, "b": 0, "x": 1})
        assert not otherwise_expansion(prop, "q0", exit_edge, state)

    def test_03_test_case_never_consumes_inputs(self, p):
        """Input edges must be matched by an explicit chain transition or the
        run dies; otherwise a length-n test would match longer input paths."""
        test_case = build_test_case_automaton([4])
        input_edge = p.edges[0]
        state = ConcreteDataState({"x": 5})
        assert not otherwise_expansion(test_case, "q0", input_edge, state)
        assert not otherwise_expansion(test_case, "q1", input_edge, state)

    def test_04_enabled_on_unmatched_edge(self, p):
        prop = corpus.prop()
        body_edge = [e for e in p.edges if e.op.text == "a++"][0]
        assert otherwise_expansion(prop, "q0", body_edge,
                                   ConcreteDataState({"a": 1, "b": 0, "x": 2}))


class TestMatchPath:
    def test_01_property_observes_clean_run(self, p):
        verdict = match_path(corpus.prop(), path_with_inputs(p, (0,)))
        assert verdict.covered
        assert not verdict.accepted
        assert verdict.k == 4

    def test_02_violation_witness_accepts_broken_run(self, p_prime):
        verdict = match_path(corpus.witness_violation(), path_with_inputs(p_prime, (1,)))
        assert verdict.accepted
        assert verdict.run[-1][1] == "w6"
        assert verdict.run[0] == (None, "w0")

    def test_03_test_case_covers_but_never_accepts(self, p):
        verdict = match_path(build_test_case_automaton([4]), path_with_inputs(p, (4,)))
        assert verdict.covered
        assert not verdict.accepted
        assert verdict.k == path_with_inputs(p, (4,)).length

    def test_04_empty_path_is_covered(self, p):
        verdict = match_path(corpus.prop(), ConcretePath.initial(p))
        assert verdict.covered
        assert verdict.k == 0
        assert not verdict.accepted
        assert verdict.run == ((None, "q0"),)

    def test_05_false_initial_invariant_matches_nothing(self, p):
        aut = parse_automaton(
            "automaton stuck kind=correctness-witness\n"
            "state s0 init inv: false\n"
            "trans s0 -> s0 otherwise\n")
        verdict = match_path(aut, ConcretePath.initial(p))
        assert verdict.k is None
        assert not verdict.matched
        assert verdict.run is None

    def test_06_wrong_input_value_kills_test_case(self, p):
        assert not covers(build_test_case_automaton([3]), path_with_inputs(p, (4,)))
        assert not covers(build_test_case_automaton([4]), path_with_inputs(p, (0,)))

    def test_07_accepts_covers_helpers(self, p_prime):
        path = path_with_inputs(p_prime, (1,))
        assert accepts(corpus.prop(), path)
        assert covers(corpus.prop(), path)

    def test_08_template_binds_to_input_target(self):
        """The placeholder compares against whatever variable the matched
        input edge assigns."""
        from coopverify.lang import parse_program
        cfa = parse_program("int y = input();\n")
        assert covers(build_test_case_automaton([2]), path_with_inputs(cfa, (2,)))
        assert not covers(build_test_case_automaton([1]), path_with_inputs(cfa, (2,)))


class TestFrontiers:
    def test_01_initial_frontier_records_final_entry(self):
        cond = parse_automaton(corpus.INSTANT_CONDITION)
        frontier, entries = initial_frontier(cond, EMPTY_STATE)
        assert frontier == frozenset({"q0"})
        assert entries == frozenset({FinalEntry(None, "q0")})

    def test_02_step_frontier_moves_on_match(self, p):
        prop = corpus.prop()
        frontier, entries = initial_frontier(prop, EMPTY_STATE)
        assert entries == frozenset()
        exit_edge = [e for e in p.edges if e.source == 3 and e.target == 6][0]
        succ, entries = step_frontier(prop, frontier, exit_edge,
                                      ConcreteDataState({"a": 1, "b": 0, "x": 1}))
        assert succ == frozenset({"qe"})
        assert {e.state for e in entries} == {"qe"}

    def test_03_step_frontier_stays_via_otherwise(self, p):
        prop = corpus.prop()
        frontier, _ = initial_frontier(prop, EMPTY_STATE)
        succ, entries = step_frontier(prop, frontier, p.edges[0],
                                      ConcreteDataState({"x": 1}))
        assert succ == frozenset({"q0"})
        assert entries == frozenset()


class TestAutFormat:
    def test_01_property_sample_shape(self):
        prop = corpus.prop()
        assert prop.kind is AutomatonKind.PROPERTY
        assert set(prop.states) == {"q0", "qe"}
        assert prop.finals == frozenset({"qe"})
        assert prop.otherwise_at("q0") is not None

    def test_02_round_trip_samples(self):
        autos = [corpus.prop(), corpus.goals(), corpus.cond(),
                 corpus.witness_correct(), corpus.witness_violation()]
        for aut in autos:
            assert parse_automaton(serialize_automaton(aut)) == aut

    def test_03_round_trip_test_case(self):
        aut = build_test_case_automaton([1, 2])
        again = parse_automaton(serialize_automaton(aut))
        assert again == aut

    def test_04_serialize_is_stable(self):
        text = serialize_automaton(corpus.cond())
        assert serialize_automaton(parse_automaton(text)) == text

    def test_05_duplicate_otherwise_rejected(self):
        with pytest.raises(DuplicateOtherwise):
            parse_automaton(
                "automaton twice kind=property\n"
                "state q0 init\n"
                "trans q0 -> q0 otherwise\n"
                "trans q0 -> q0 otherwise\n")

    def test_06_unknown_kind_lists_choices(self):
        with pytest.raises(UnknownKind) as exc:
            parse_automaton("automaton bad kind=monitor\nstate q0 init\n")
        assert "property" in str(exc.value)
        assert "test-case" in str(exc.value)

    def test_07_otherwise_must_self_loop(self):
        with pytest.raises(ParseError):
            parse_automaton(
                "automaton wrong kind=property\n"
                "state q0 init\n"
                "state q1\n"
                "trans q0 -> q1 otherwise\n")

    def test_08_header_required(self):
        with pytest.raises(ParseError):
            parse_automaton("state q0 init\n")

    def test_09_invariants_parse(self):
        wit = corpus.witness_correct()
        assert "s3" in wit.invariants
        assert wit.invariant("s0") == TRUE


def verdict_triple(v):
    return (v.k, v.accepted, v.covered)


class TestMatchSemantics:
    """The determinized matcher against the naive run enumeration."""

    def corpus_pairs(self):
        p, pp = corpus.program_p(), corpus.program_p_prime()
        automata = [corpus.prop(), corpus.goals(), corpus.cond(),
                    corpus.witness_correct(), corpus.witness_violation(),
                    build_test_case_automaton([4]), build_test_case_automaton([]),
                    build_test_case_automaton([0, 1])]
        for program in (p, pp):
            paths = enumerate_paths(program, Interval(-2, 2), 200).paths
            for aut in automata:
                for path in paths:
                    yield aut, path

    def test_01_matcher_equals_naive_enumeration(self):
        checked = 0
        for aut, path in self.corpus_pairs():
            assert verdict_triple(match_path(aut, path)) \
                == verdict_triple(naive_match_path(aut, path))
            checked += 1
        assert checked > 50

    def test_02_matcher_equals_naive_on_random_inputs(self):
        rng = random.Random(6001)
        for _ in range(12):
            program = generators.random_program(rng)
            automata = [generators.random_property(rng, program),
                        generators.random_test_goal(rng, program),
                        generators.random_violation_witness(rng, program),
                        generators.random_correctness_witness(rng, program),
                        generators.random_condition(rng, program),
                        build_test_case_automaton(generators.random_inputs(rng))]
            for path in enumerate_paths(program, Interval(-2, 2), 200).paths:
                for aut in automata:
                    assert verdict_triple(match_path(aut, path)) \
                        == verdict_triple(naive_match_path(aut, path))

    def test_03_verdict_fields_agree_with_run_set(self):
        for aut, path in self.corpus_pairs():
            verdict = match_path(aut, path)
            runs = all_runs(aut, path)
            assert runs
            assert verdict.k == max(len(r) - 1 for r in runs)
            assert verdict.accepted == any(r[-1][1] in aut.finals for r in runs)
            assert verdict.covered == any(len(r) - 1 == path.length for r in runs)

    def test_04_acceptance_is_stable_under_extension(self):
        for aut, path in self.corpus_pairs():
            hit = False
            for i in range(path.length + 1):
                now = match_path(aut, path.prefix(i)).accepted
                assert now or not hit
                hit = hit or now

    def test_05_full_length_final_run_means_accepted_cover(self):
        for aut, path in self.corpus_pairs():
            runs = all_runs(aut, path)
            full_final = any(len(r) - 1 == path.length and r[-1][1] in aut.finals
                             for r in runs)
            if full_final:
                verdict = match_path(aut, path)
                assert verdict.covered and verdict.accepted

    def test_06_property_covers_every_path(self, p, p_prime):
        prop = corpus.prop()
        for program in (p, p_prime):
            for path in enumerate_paths(program, Interval(-2, 2), 200).paths:
                assert covers(prop, path)

    def test_07_accepting_run_ends_in_final(self):
        for aut, path in self.corpus_pairs():
            verdict = match_path(aut, path)
            if verdict.accepted:
                assert verdict.run[-1][1] in aut.finals
