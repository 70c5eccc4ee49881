"""Tests for the condition language: parsing, evaluation, bounded tautology."""

import random

import pytest

from coopverify.errors import UnboundTemplate, UndefinedVariable
from coopverify.predicates import (
    CHI,
    FALSE,
    TRUE,
    And,
    BinExpr,
    Comparison,
    Const,
    Interval,
    Not,
    Or,
    Var,
    conjoin,
    disjoin,
    eval_expr,
    evaluate,
    expr_text,
    has_complement_pair,
    is_tautology_bounded,
    mentions_template,
    normalize_text,
    parse_expression,
    parse_predicate,
    pred_text,
    substitute_template,
    variables_of,
)


def pred(text):
    return parse_predicate(text)


class TestParsing:
    """Concrete syntax of conditions and arithmetic expressions."""

    def test_01_comparison(self):
        assert pred("a < x") == Comparison("<", Var("a"), Var("x"))

    def test_02_precedence_and_binds_tighter_than_or(self):
        p = pred("a == 0 || b == 0 && x == 0")
        assert isinstance(p, Or)
        assert isinstance(p.right, And)

    def test_03_negation_and_parentheses(self):
        p = pred("!(a < x)")
        assert p == Not(Comparison("<", Var("a"), Var("x")))

    def test_04_unary_minus_folds_into_literal(self):
        assert parse_expression("-3") == Const(-3)
        assert pred("x <= -1") == Comparison("<=", Var("x"), Const(-1))

    def test_05_arithmetic_expression(self):
        e = parse_expression("a + 2 * b")
        assert e == BinExpr("+", Var("a"), BinExpr("*", Const(2), Var("b")))

    def test_06_template_token(self):
        p = pred("chi == 4")
        assert p == Comparison("==", CHI, Const(4))
        assert mentions_template(p)

    def test_07_text_round_trip(self):
        for text in ("a < x", "!(a < x)", "a != b && x >= 1", "x <= 0 || a == b",
                     "chi == 4", "a - 1 == b"):
            assert pred(pred_text(pred(text))) == pred(text)

    def test_08_normalize_text(self):
        assert normalize_text("a  <x") == normalize_text("a < x")

    def test_09_pred_text_forms(self):
        assert pred_text(Not(Comparison("<", Var("a"), Var("x")))) == "!(a < x)"
        assert pred_text(TRUE) == "true"
        assert pred_text(FALSE) == "false"

    def test_10_expr_text_round_trip(self):
        for text in ("a + 2 * b", "x - 1", "-3", "a - b - 1"):
            e = parse_expression(text)
            assert parse_expression(expr_text(e)) == e


class TestEvaluation:
    def test_01_equality_false(self):
        assert evaluate(pred("a != b"), {"a": 2, "b": 2}) is False

    def test_02_bound_check_true(self):
        assert evaluate(pred("x >= 1"), {"x": 4}) is True

    def test_03_template_bound_to_input_variable(self):
        assert evaluate(pred("chi == 4"), {"x": 4}, chi="x") is True
        assert evaluate(pred("chi == 4"), {"x": 5}, chi="x") is False

    def test_04_template_without_binding(self):
        with pytest.raises(UnboundTemplate):
            evaluate(pred("chi == 4"), {"x": 4})

    def test_05_unknown_variable(self):
        with pytest.raises(UndefinedVariable):
            evaluate(pred("a < x"), {"a": 0})

    def test_06_eval_expr(self):
        assert eval_expr(parse_expression("a + 2 * b"), {"a": 1, "b": 3}) == 7

    def test_07_conjoin_disjoin_identities(self):
        assert conjoin([]) == TRUE
        assert disjoin([]) == FALSE
        p = pred("a < x")
        assert conjoin([p]) == p
        assert disjoin([p]) == p

    def test_08_substitute_template(self):
        p = substitute_template(pred("chi == 4"), Var("x"))
        assert p == pred("x == 4")
        assert not mentions_template(p)

    def test_09_variables_of(self):
        assert variables_of(pred("a != b && x >= 1")) == {"a", "b", "x"}
        assert variables_of(TRUE) == frozenset()

    def test_10_boolean_identities_on_random_states(self):
        """Double negation, De Morgan, and commutativity hold extensionally."""
        rng = random.Random(411)
        a, b = pred("a < x"), pred("b == 0")
        for _ in range(50):
            state = {v: rng.randint(-5, 5) for v in ("a", "b", "x")}
            assert evaluate(Not(Not(a)), state) == evaluate(a, state)
            assert (evaluate(Not(And(a, b)), state)
                    == evaluate(Or(Not(a), Not(b)), state))
            assert evaluate(And(a, b), state) == evaluate(And(b, a), state)
            assert evaluate(Or(a, b), state) == evaluate(Or(b, a), state)


class TestInterval:
    def test_01_rejects_empty(self):
        with pytest.raises(ValueError):
            Interval(1, 0)

    def test_02_width_and_membership(self):
        dom = Interval(-2, 2)
        assert dom.width == 5
        assert 0 in dom and -2 in dom and 3 not in dom
        assert list(dom) == [-2, -1, 0, 1, 2]

    def test_03_values_by_magnitude(self):
        assert Interval(-2, 2).values_by_magnitude() == [0, -1, 1, -2, 2]

    def test_04_str(self):
        assert str(Interval(-8, 8)) == "[-8, 8]"


class TestTautologyCheck:
    def test_01_excluded_middle_is_syntactic(self):
        gamma = pred("a < x")
        result = is_tautology_bounded(Or(gamma, Not(gamma)), {"a", "x"}, Interval(-2, 2))
        assert result.is_tautology
        assert result.syntactic

    def test_02_falsifiable_with_simplest_counterexample(self):
        result = is_tautology_bounded(pred("a != b"), {"a", "b"}, Interval(-2, 2))
        assert result.status == "falsifiable"
        assert result.counterexample == {"a": 0, "b": 0}

    def test_03_empty_disjunction_is_falsifiable(self):
        """An empty guard disjunction collapses to false and refutes with the
        empty state."""
        result = is_tautology_bounded(disjoin([]), set(), Interval(-2, 2))
        assert result.status == "falsifiable"
        assert result.counterexample == {}

    def test_04_inconclusive_without_variable_coverage(self):
        result = is_tautology_bounded(pred("a != b"), set(), Interval(-2, 2))
        assert result.status == "inconclusive"
        assert result.counterexample is None

    def test_05_template_is_rejected(self):
        with pytest.raises(UnboundTemplate):
            is_tautology_bounded(pred("chi == 4"), {"x"}, Interval(-2, 2))

    def test_06_semantic_tautology_without_fast_path(self):
        result = is_tautology_bounded(pred("x <= 0 || x >= 0"), {"x"}, Interval(-3, 3))
        assert result.is_tautology
        assert not result.syntactic

    def test_07_has_complement_pair(self):
        gamma = pred("a != b")
        assert has_complement_pair([gamma, Not(gamma)])
        assert not has_complement_pair([gamma, Not(pred("a == b"))])
        assert not has_complement_pair([TRUE, Not(TRUE)])

    def test_08_tautology_verdict_is_sound_on_samples(self):
        rng = random.Random(77)
        dom = Interval(-2, 2)
        p = Or(pred("a < x"), Not(pred("a < x")))
        assert is_tautology_bounded(p, {"a", "x"}, dom).is_tautology
        for _ in range(30):
            state = {"a": rng.randint(-2, 2), "x": rng.randint(-2, 2)}
            assert evaluate(p, state)
