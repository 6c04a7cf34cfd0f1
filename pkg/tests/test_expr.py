import math

import numpy as np
import pytest

from algmech.expr import (
    ArityError,
    DomainError,
    ExprError,
    ParseError,
    UnknownIdentifierError,
    directional,
    evaluate,
    free_variables,
    parse,
    second_directional,
    to_string,
)


class TestParse:
    def test_polynomial_with_sin(self):
        e = parse("x1^2 + sin(x2)", ("x1", "x2"))
        assert evaluate(e, {"x1": 2.0, "x2": 0.0}) == 4.0

    def test_unary_minus_product(self):
        e = parse("-x1*x2", ("x1", "x2"))
        assert evaluate(e, {"x1": 3.0, "x2": 5.0}) == -15.0

    def test_double_plus_is_syntax_error(self):
        with pytest.raises(ParseError):
            parse("x1 + + x2", ("x1", "x2"))

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError):
            parse("x1 + y", ("x1",))

    def test_variable_called_as_function(self):
        with pytest.raises(ArityError):
            parse("x1(2)", ("x1",))

    def test_power_right_associative(self):
        e = parse("2^3^2", ())
        assert evaluate(e, {}) == 512.0

    def test_power_binds_tighter_than_unary_minus(self):
        e = parse("-2^2", ())
        assert evaluate(e, {}) == -4.0

    def test_precedence_mul_over_add(self):
        e = parse("1 + 2*3", ())
        assert evaluate(e, {}) == 7.0

    def test_scientific_literal(self):
        e = parse("1.5e-3", ())
        assert evaluate(e, {}) == 1.5e-3

    def test_syntax_error_reports_offset(self):
        with pytest.raises(ParseError) as exc:
            parse("x1 + + x2", ("x1", "x2"))
        assert exc.value.offset == 5


class TestEval:
    def test_exp_zero(self):
        assert evaluate(parse("exp(0)", ()), {}) == 1.0

    def test_division_by_zero(self):
        e = parse("x1/x2", ("x1", "x2"))
        with pytest.raises(DomainError):
            evaluate(e, {"x1": 1.0, "x2": 0.0})

    def test_pythagorean(self):
        e = parse("sqrt(x1^2+x2^2)", ("x1", "x2"))
        assert evaluate(e, {"x1": 3.0, "x2": 4.0}) == 5.0

    def test_log_nonpositive(self):
        with pytest.raises(DomainError):
            evaluate(parse("log(x1)", ("x1",)), {"x1": -1.0})

    def test_negative_base_fractional_power(self):
        with pytest.raises(DomainError):
            evaluate(parse("x1^0.5", ("x1",)), {"x1": -4.0})

    def test_negative_base_integer_power(self):
        assert evaluate(parse("x1^2", ("x1",)), {"x1": -3.0}) == 9.0


class TestDirectional:
    def test_product_rule(self):
        e = parse("x1*x2", ("x1", "x2"))
        assert directional(e, {"x1": 3.0, "x2": 5.0}, {"x1": 1.0}) == (15.0, 5.0)

    def test_sin_at_zero(self):
        e = parse("sin(x1)", ("x1",))
        assert directional(e, {"x1": 0.0}, {"x1": 1.0}) == (0.0, 1.0)

    def test_cube(self):
        e = parse("x1^3", ("x1",))
        assert directional(e, {"x1": 2.0}, {"x1": 1.0}) == (8.0, 12.0)


class TestSecondDirectional:
    def test_square(self):
        e = parse("x1^2", ("x1",))
        assert second_directional(e, {"x1": 1.7}, {"x1": 1.0}, {"x1": 1.0}) == 2.0

    def test_mixed_partial(self):
        e = parse("x1*x2", ("x1", "x2"))
        env = {"x1": 0.4, "x2": -0.9}
        assert second_directional(e, env, {"x1": 1.0}, {"x2": 1.0}) == 1.0

    def test_sin_second(self):
        e = parse("sin(x1)", ("x1",))
        assert second_directional(e, {"x1": 0.0}, {"x1": 1.0}, {"x1": 1.0}) == 0.0


class TestPrinter:
    @pytest.mark.parametrize(
        "text",
        [
            "x1 + x2*x3",
            "-x1*(x2 - x3)^2",
            "sin(x1)*cos(x2) - exp(x3)/2",
            "x1^x2",
            "2^3^2",
            "-(x1 + x2)",
            "x1 - (x2 - x3)",
        ],
    )
    def test_round_trip(self, text):
        names = ("x1", "x2", "x3")
        e = parse(text, names)
        e2 = parse(to_string(e), names)
        rng = np.random.default_rng(0)
        for _ in range(100):
            env = dict(zip(names, rng.uniform(0.1, 1.0, 3)))
            assert evaluate(e, env) == evaluate(e2, env)

    def test_free_variables(self):
        e = parse("x1 + sin(x3)", ("x1", "x2", "x3"))
        assert free_variables(e) == {"x1", "x3"}
