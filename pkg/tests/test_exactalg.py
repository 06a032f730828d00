"""
Tests for exact rational polynomials: alphabet, arithmetic, canonical printing.
"""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from app.exactalg import (
    M_VAR,
    ONE,
    ZERO,
    Indeterminate,
    Polynomial,
    a_var,
    a_weight,
    const,
    format_poly,
    l_var,
    parse_poly,
    parse_substitution,
    poly_add,
    poly_eval,
    poly_mul,
    poly_product,
    poly_sub,
    poly_sum,
    s_var,
    split_assignments,
    to_rational,
    var,
    x_var,
)
from app.exceptions import MissingAssignment, PolynomialParseError, UnknownIndeterminate

ALPHABET = [a_var(1), a_var(2), a_var(3), M_VAR, s_var(1, 2), l_var(3), x_var(1)]

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
monomials = st.lists(
    st.tuples(st.sampled_from(ALPHABET), st.integers(min_value=1, max_value=3)),
    max_size=3,
    unique_by=lambda pair: pair[0],
)
polynomials = st.dictionaries(
    monomials.map(lambda m: tuple(sorted(m))), rationals, max_size=5
).map(Polynomial)
assignments = st.fixed_dictionaries(
    {v: st.fractions(min_value=-5, max_value=5, max_denominator=4) for v in ALPHABET}
)


class TestAlphabet:
    """Names, parsing and ordering of the indeterminates."""

    @pytest.mark.parametrize("name", ["a1", "a12", "M", "s_1_2", "s_3_10", "l3", "l7", "x1", "x25"])
    def test_parse_round_trip(self, name):
        assert Indeterminate.parse(name).name == name

    @pytest.mark.parametrize("name", ["a0", "b1", "s_2_1", "s_1_1", "l2", "m", "x", "a-1", ""])
    def test_unknown_names_rejected(self, name):
        with pytest.raises(UnknownIndeterminate):
            Indeterminate.parse(name)

    def test_alphabet_order(self):
        ordered = [
            a_var(1), a_var(2), M_VAR, s_var(1, 2), s_var(1, 3), s_var(2, 3), l_var(3), x_var(1), x_var(2)
        ]
        assert sorted(reversed(ordered)) == ordered

    def test_s_var_normalizes_pair(self):
        assert s_var(3, 1) == s_var(1, 3)
        with pytest.raises(UnknownIndeterminate):
            s_var(2, 2)

    def test_a_weight(self):
        assert a_weight(a_var(4)) == 4
        assert a_weight(M_VAR) == 0
        assert a_weight(x_var(3)) == 0


class TestCanonicalFormat:
    """Bit-exact printing and parsing."""

    @pytest.mark.parametrize(
        "text",
        [
            "12*a1^2 - 6*a2",
            "4*x1*x3 + 3*x2^2",
            "2*M + 2*s_1_2",
            "x1^3",
            "-a1",
            "-1/2*a1*a2 + 3/4",
            "0",
            "7",
        ],
    )
    def test_canonical_strings_round_trip(self, text):
        assert format_poly(parse_poly(text)) == text

    def test_term_order_is_graded_lexicographic(self, a1, a2):
        p = a2.scale(-6) + (a1 * a1).scale(12)
        assert format_poly(p) == "12*a1^2 - 6*a2"

    def test_evaluate_b3_at_ones(self, b3_poly):
        assert parse_poly(b3_poly).evaluate({"a1": 1, "a2": 1}) == 6

    def test_parse_normalizes(self):
        assert format_poly(parse_poly("a2*a1 + a1*a2 - 2/4*a1*a2")) == "3/2*a1*a2"

    @pytest.mark.parametrize("text", ["", "12*", "a1 ^ x", "3/0*a1", "a1 a2", "a1 + + a2", "2$a1"])
    def test_parse_errors(self, text):
        with pytest.raises(PolynomialParseError):
            parse_poly(text)

    def test_parse_unknown_variable(self):
        with pytest.raises(UnknownIndeterminate):
            parse_poly("3*y1")

    @settings(max_examples=300, deadline=None)
    @given(polynomials)
    def test_format_parse_round_trip(self, p):
        assert parse_poly(format_poly(p)) == p


class TestRingAxioms:
    """Property tests of the commutative ring structure."""

    @settings(max_examples=1000, deadline=None)
    @given(polynomials, polynomials, polynomials)
    def test_associativity_and_distributivity(self, p, q, r):
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r

    @settings(max_examples=1000, deadline=None)
    @given(polynomials, polynomials)
    def test_commutativity_and_identities(self, p, q):
        assert p + q == q + p
        assert p * q == q * p
        assert p + ZERO == p
        assert p * ONE == p
        assert p - p == ZERO
        assert (p * ZERO).is_zero()

    @settings(max_examples=1000, deadline=None)
    @given(polynomials, polynomials, assignments)
    def test_evaluation_is_a_homomorphism(self, p, q, values):
        assert (p + q).evaluate(values) == p.evaluate(values) + q.evaluate(values)
        assert (p * q).evaluate(values) == p.evaluate(values) * q.evaluate(values)

    @settings(max_examples=200, deadline=None)
    @given(polynomials, st.integers(min_value=0, max_value=4))
    def test_pow_matches_repeated_product(self, p, e):
        expected = ONE
        for _ in range(e):
            expected = expected * p
        assert p ** e == expected

    def test_zero_coefficients_are_dropped(self, a1):
        assert len(a1 - a1) == 0
        assert (a1 - a1) == 0
        assert Polynomial({((a_var(1), 1),): 0}).is_zero()


class TestEvaluationAndSubstitution:

    def test_missing_assignment(self, a1, a2):
        with pytest.raises(MissingAssignment) as excinfo:
            (a1 * a2).evaluate({"a1": 2})
        assert excinfo.value.details["indeterminate"] == "a2"

    def test_partial_substitution(self, a1, a2):
        p = parse_poly("12*a1^2 - 6*a2")
        assert p.substitute({"a1": 2}) == parse_poly("48 - 6*a2")
        assert p.substitute({"a2": a1 * a1}) == (a1 * a1).scale(6)

    def test_substitution_with_polynomial_image(self):
        p = parse_poly("3*x1*x2")
        q = p.substitute({"x1": 1, "x2": parse_poly("2*a1")})
        assert format_poly(q) == "6*a1"

    def test_degree_and_variables(self):
        p = parse_poly("a1^2*a3 + M - 4")
        assert p.degree() == 3
        assert [v.name for v in p.variables()] == ["a1", "a3", "M"]
        assert sorted(p.weighted_degrees(a_weight)) == [0, 0, 5]
        assert ZERO.degree() == -1

    def test_to_rational(self):
        assert to_rational("-3/4") == Fraction(-3, 4)
        assert to_rational(5) == Fraction(5)
        with pytest.raises(PolynomialParseError):
            to_rational("1/0")


class TestAssignments:

    def test_split(self):
        assert split_assignments("a1=2, a2=1/3") == {"a1": "2", "a2": "1/3"}
        assert split_assignments(None) == {}
        assert split_assignments("  ") == {}

    def test_split_rejects_malformed(self):
        with pytest.raises(PolynomialParseError):
            split_assignments("a1=2,a2")

    def test_parse_substitution(self):
        mapping = parse_substitution("x1=1,x2=2*a1")
        assert mapping == {x_var(1): ONE, x_var(2): parse_poly("2*a1")}


class TestFunctionalHelpers:

    def test_arithmetic(self):
        p = parse_poly("12*a1^2 - 6*a2")
        q = parse_poly("6*a2 + a3")
        assert format_poly(poly_add(p, q)) == "12*a1^2 + a3"
        assert format_poly(poly_sub(p, p)) == "0"
        assert format_poly(poly_mul(var("a1"), const(Fraction(-1, 3)))) == "-1/3*a1"

    def test_eval(self):
        p = parse_poly("12*a1^2 - 6*a2")
        assert poly_eval(p, {a_var(1): 1, a_var(2): 1}) == 6
        assert poly_eval(p, {"a1": Fraction(1, 2), "a2": 0}) == 3
        with pytest.raises(MissingAssignment):
            poly_eval(p, {"a1": 1})

    def test_sum_and_product(self):
        xs = [var(x_var(j)) for j in (1, 2, 3)]
        assert poly_sum(xs) == xs[0] + xs[1] + xs[2]
        assert poly_sum([]) == ZERO
        assert format_poly(poly_product(xs)) == "x1*x2*x3"
        assert poly_product([]) == ONE
        assert poly_product([xs[0], ZERO, xs[1]]) == ZERO
