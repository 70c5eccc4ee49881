"""Tests for recipe parsing, pre-flight role checking, and pipeline runs."""

import pytest

import corpus
from coopverify import (
    AutomatonKind,
    NoViolatingPath,
    ParseError,
    PipelineStepError,
    Result,
    TypeMismatch,
    Verdict,
)
from coopverify.actors import ExecutionReport, TestSuite as Suite
from coopverify.pipeline import (
    ACTORS,
    Artifact,
    Role,
    check_recipe,
    parse_recipe,
    run_pipeline,
)


def bind(p=None, phi_b=None, phi_t=None, omega=None, psi=None, t=None):
    """Initial artifact environment from keyword values."""
    pairs = (
        ("p", Role.PROGRAM, p),
        ("phi_b", Role.BEHAVIOR_PROPERTY, phi_b),
        ("phi_t", Role.TEST_GOALS, phi_t),
        ("omega", Role.WITNESS, omega),
        ("psi", Role.CONDITION, psi),
        ("t", Role.TEST, t),
    )
    return {name: Artifact(role, value) for name, role, value in pairs
            if value is not None}


class TestParseRecipe:
    def test_01_sample_recipes_parse(self):
        recipe = parse_recipe(corpus.sample_text("execval.coop"))
        assert [s.actor for s in recipe.steps] == ["verify", "extract_test", "exec_test"]
        assert recipe.steps[0].bindings == ("p", "phi_b")
        assert recipe.steps[2].bindings == ("p", "t", "phi_b")

        recipe = parse_recipe(corpus.sample_text("reduce_verify.coop"))
        assert [s.actor for s in recipe.steps] == ["reduce", "verify"]

    def test_02_comments_and_blank_lines_ignored(self):
        recipe = parse_recipe("# a pipeline\n\nstep verify p phi_b\n  # done\n")
        assert len(recipe.steps) == 1

    def test_03_unknown_actor_lists_known_ones(self):
        with pytest.raises(ParseError, match="known:.*gen_tests"):
            parse_recipe("step transmogrify p\n")

    def test_04_malformed_line(self):
        with pytest.raises(ParseError, match="step"):
            parse_recipe("verify p phi_b\n")

    def test_05_registry_is_complete(self):
        assert set(ACTORS) == {
            "verify", "validate", "conditional_verify", "reduce",
            "extract_test", "exec_test", "gen_tests", "identity",
        }


class TestCheckRecipe:
    def test_01_sample_recipe_type_checks(self, p_prime):
        recipe = parse_recipe(corpus.sample_text("execval.coop"))
        check_recipe(recipe, bind(p=p_prime, phi_b=corpus.prop()))

    def test_02_unbound_artifact_name(self, p):
        recipe = parse_recipe("step verify p phi_b\n")
        with pytest.raises(TypeMismatch) as exc:
            check_recipe(recipe, bind(p=p))
        assert exc.value.step == 0

    def test_03_wrong_role(self, p):
        recipe = parse_recipe("step verify p p\n")
        with pytest.raises(TypeMismatch, match="phi_b"):
            check_recipe(recipe, bind(p=p))

    def test_04_arity_mismatch(self, p):
        recipe = parse_recipe("step verify p\n")
        with pytest.raises(TypeMismatch):
            check_recipe(recipe, bind(p=p, phi_b=corpus.prop()))

    def test_05_simulation_tracks_produced_roles(self, p):
        # The first verify produces omega, which extract_test may then use
        # even though no witness was bound initially.
        recipe = parse_recipe("step verify p phi_b\nstep extract_test p phi_b omega\n")
        check_recipe(recipe, bind(p=p, phi_b=corpus.prop()))
        # Without the verify step the witness name is unbound.
        with pytest.raises(TypeMismatch):
            check_recipe(parse_recipe("step extract_test p phi_b omega\n"),
                         bind(p=p, phi_b=corpus.prop()))

    def test_06_optional_inputs(self, p):
        env = bind(p=p, phi_b=corpus.prop(), t=(1,))
        check_recipe(parse_recipe("step exec_test p t\n"), env)
        check_recipe(parse_recipe("step exec_test p t phi_b\n"), env)
        with pytest.raises(TypeMismatch):
            check_recipe(parse_recipe("step exec_test p t phi_b t\n"), env)

    def test_07_check_runs_before_anything_executes(self, p):
        # Step 0 would succeed; the role error in step 1 must surface
        # without running it.
        recipe = parse_recipe("step verify p phi_b\nstep reduce p omega\n")
        with pytest.raises(TypeMismatch) as exc:
            check_recipe(recipe, bind(p=p, phi_b=corpus.prop()))
        assert exc.value.step == 1


class TestRunPipeline:
    def test_01_execution_validation_recipe(self, p_prime, cfg4):
        recipe = parse_recipe(corpus.sample_text("execval.coop"))
        result = run_pipeline(recipe, bind(p=p_prime, phi_b=corpus.prop()), cfg4)
        assert len(result.log) == 3

        first = result.log[0]
        assert first.actor == "verify"
        assert set(first.outputs) == {"r", "omega"}
        assert first.outputs["r"].value.result is Result.FALSE

        second = result.log[1]
        assert second.outputs["t"].value == (1,)

        third = result.log[2]
        assert third.outputs == {}
        assert isinstance(third.report, ExecutionReport)
        assert third.report.violation_observed is True

    def test_02_reduce_then_verify_proves_p(self, p, cfg4):
        recipe = parse_recipe(corpus.sample_text("reduce_verify.coop"))
        result = run_pipeline(recipe, bind(p=p, phi_b=corpus.prop(), psi=corpus.cond()), cfg4)
        assert result.artifacts["r"].value.result is Result.TRUE
        # reduce rebound the program role to the residual.
        assert result.artifacts["p"].value.initial == 7
        witness = result.artifacts["omega"].value
        assert witness.kind is AutomatonKind.CORRECTNESS_WITNESS

    def test_03_reduce_then_verify_refutes_p_prime(self, p_prime, cfg4):
        recipe = parse_recipe(corpus.sample_text("reduce_verify.coop"))
        result = run_pipeline(
            recipe, bind(p=p_prime, phi_b=corpus.prop(), psi=corpus.cond()), cfg4)
        assert result.artifacts["r"].value.result is Result.FALSE

    def test_04_conditional_verify_rebinds_the_condition(self, p, cfg4):
        recipe = parse_recipe("step conditional_verify p phi_b psi\n")
        result = run_pipeline(recipe, bind(p=p, phi_b=corpus.prop(), psi=corpus.cond()), cfg4)
        assert result.artifacts["r"].value.result is Result.TRUE
        out = result.artifacts["psi"].value
        assert out is not corpus.cond()
        assert sorted(out.states) == ["c0", "c1"]

    def test_05_gen_tests_recipe(self, p):
        recipe = parse_recipe("step gen_tests p phi_t\n")
        result = run_pipeline(recipe, bind(p=p, phi_t=corpus.goals()), corpus.CFG2)
        suite = result.artifacts["ts"].value
        assert isinstance(suite, Suite)
        assert suite.input_sequences() == [(1,)]

    def test_06_identity_passes_an_artifact_through(self, p):
        recipe = parse_recipe("step identity p\n")
        result = run_pipeline(recipe, bind(p=p))
        assert result.artifacts["p"].value is p
        assert result.log[0].outputs["p"].role is Role.PROGRAM

    def test_07_actor_failures_carry_the_step_index(self, p, cfg4):
        recipe = parse_recipe("step extract_test p phi_b omega\n")
        env = bind(p=p, phi_b=corpus.prop(), omega=corpus.witness_violation())
        with pytest.raises(PipelineStepError) as exc:
            run_pipeline(recipe, env, cfg4)
        assert exc.value.step == 0
        assert exc.value.actor == "extract_test"
        assert isinstance(exc.value.cause, NoViolatingPath)

    def test_08_validate_recipe_confirms_a_witness(self, p_prime, cfg4):
        recipe = parse_recipe("step validate p phi_b omega\n")
        env = bind(p=p_prime, phi_b=corpus.prop(), omega=corpus.witness_violation())
        result = run_pipeline(recipe, env, cfg4)
        bundle = result.artifacts["r"].value
        assert bundle.result is Result.FALSE
        assert bundle.judgment.verdict is Verdict.HOLDS

    def test_09_exec_without_property_reports_no_flag(self, p, cfg4):
        recipe = parse_recipe("step exec_test p t\n")
        result = run_pipeline(recipe, bind(p=p, t=(4,)), cfg4)
        report = result.log[0].report
        assert report.status == "completed"
        assert report.violation_observed is None
