"""
Tests for the Legendre transform of actions and the rooted-tree inversion formula.
"""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from app.exactalg import Polynomial, format_poly, parse_poly
from app.exceptions import NotInvertible, OrderMismatch
from app.legendre import (
    LEAF,
    ActionSeries,
    build_A,
    check_involution,
    check_legendre_b_relation,
    check_loday,
    check_plane_tree_counts,
    count_plane_trees,
    enumerate_rooted_trees,
    legendre_transform,
    loday_inverse,
    plane_embeddings,
    random_action,
    tree_profile,
    tree_series,
)
from app.models import SeriesKind
from app.series import Diffeomorphism, Series, derive, invert, scale, series_from_diffeo, to_egf

CHERRY = (LEAF, LEAF)


def action(*coefficients) -> ActionSeries:
    return ActionSeries(Series.of(SeriesKind.OGF, coefficients))


class TestActions:

    def test_build_A(self):
        A = build_A(Diffeomorphism.generic(4), 4)
        assert A.truncation == 4
        assert [format_poly(c) for c in A.series.coefficients] == ["0", "0", "-1/2", "-1/3*a1", "-1/4*a2"]

    def test_derivative_of_A_is_minus_F(self):
        F = Diffeomorphism.generic(6)
        A = build_A(F, 6)
        assert derive(A.series) == scale(series_from_diffeo(F, 5), -1)

    def test_too_short(self):
        with pytest.raises(OrderMismatch):
            action(0, 0)

    def test_must_start_quadratic(self):
        with pytest.raises(NotInvertible):
            action(0, 1, 1)
        with pytest.raises(NotInvertible):
            action(1, 0, 1)

    def test_quadratic_term_required(self):
        with pytest.raises(NotInvertible):
            action(0, 0, 0, 1)


class TestLegendreTransform:

    def test_pure_quadratic(self):
        # c t^2 goes to -x^2/(4c)
        LA = legendre_transform(action(0, 0, 3, 0, 0), 3)
        assert LA == Series.of(SeriesKind.OGF, [0, 0, Fraction(-1, 12), 0])

    def test_identity_action(self):
        # -t^2/2 goes to x^2/2
        LA = legendre_transform(action(0, 0, Fraction(-1, 2), 0), 2)
        assert LA == Series.of(SeriesKind.OGF, [0, 0, Fraction(1, 2)])

    def test_transform_coefficients_are_shifted_amplitudes(self):
        LA = legendre_transform(build_A(Diffeomorphism.generic(6), 6), 5)
        assert LA.kind == SeriesKind.OGF
        assert [format_poly(c) for c in to_egf(LA).coefficients] == [
            "0", "0", "1", "-2*a1", "12*a1^2 - 6*a2", "-120*a1^3 + 120*a1*a2 - 24*a3"
        ]

    def test_odd_coefficients_follow_the_reflected_slope(self):
        # A = -(t^2/2 + t^3/3): L_3 = b_2 = -2 at a1 = 1
        LA = legendre_transform(action(0, 0, Fraction(-1, 2), Fraction(-1, 3), 0), 3)
        assert to_egf(LA).coefficient(3) == Polynomial.constant(-2)

    def test_needs_one_extra_order(self):
        with pytest.raises(OrderMismatch):
            legendre_transform(action(0, 0, 1, 1), 3)

    def test_symbolic_slope_rejected(self):
        A = ActionSeries(Series.of(SeriesKind.OGF, [0, 0, parse_poly("a1"), 0]))
        with pytest.raises(NotInvertible):
            legendre_transform(A, 2)

    def test_tree_series_coefficients_are_shifted_amplitudes(self):
        T = tree_series(build_A(Diffeomorphism.generic(6), 6), 5)
        assert T.kind == SeriesKind.EGF
        assert [format_poly(c) for c in T.coefficients[:5]] == ["0", "0", "1", "-2*a1", "12*a1^2 - 6*a2"]

    @pytest.mark.parametrize("order", [2, 5, 8])
    def test_b_relation_report(self, order):
        report = check_legendre_b_relation(order)
        assert report.passed, report.render()
        assert len(report.checks) == order
        assert {c.identity for c in report.checks[1:]} == {"legendre_coefficient"}

    def test_b_relation_numeric(self):
        F = Diffeomorphism.with_assignments(7, {"a1": "2", "a2": "-1/3", "a3": "5"})
        assert check_legendre_b_relation(6, F).passed

    def test_involution_of_quadratic(self):
        A = action(0, 0, Fraction(1, 2), 0, 0)
        twice = legendre_transform(ActionSeries(legendre_transform(A, 3)), 2)
        assert twice == Series.of(SeriesKind.OGF, [0, 0, Fraction(1, 2)])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=2, max_value=8))
    def test_involution_gives_reflected_action(self, seed, order):
        report = check_involution(random_action(order + 2, seed), order)
        assert report.passed, report.render()

    def test_random_action_is_reproducible(self):
        assert random_action(6, 11) == random_action(6, 11)
        A = random_action(6, 11)
        assert A.truncation == 6
        assert not A.series.coefficient(2).is_zero()


class TestRootedTrees:

    @pytest.mark.parametrize(
        "leaves,count", [(1, 1), (2, 1), (3, 2), (4, 5), (5, 12), (6, 33), (7, 90), (8, 252)]
    )
    def test_unlabelled_counts(self, leaves, count):
        trees = list(enumerate_rooted_trees(leaves))
        assert len(trees) == count
        assert len(set(trees)) == count

    @pytest.mark.parametrize(
        "leaves,count", [(1, 1), (2, 1), (3, 3), (4, 11), (5, 45), (6, 197), (7, 903), (8, 4279)]
    )
    def test_plane_counts(self, leaves, count):
        assert count_plane_trees(leaves) == count
        assert sum(plane_embeddings(t) for t in enumerate_rooted_trees(leaves)) == count

    def test_no_leaves(self):
        with pytest.raises(ValueError):
            list(enumerate_rooted_trees(0))

    def test_embeddings(self):
        assert plane_embeddings(LEAF) == 1
        assert plane_embeddings(CHERRY) == 1
        assert plane_embeddings((LEAF, CHERRY)) == 2
        assert plane_embeddings((LEAF, LEAF, LEAF)) == 1
        assert plane_embeddings((CHERRY, CHERRY)) == 1

    def test_profile(self):
        assert tree_profile(CHERRY).m == ((1, 1),)
        profile = tree_profile((LEAF, CHERRY))
        assert profile.m == ((1, 2),)
        assert profile.vertices == 2
        assert format_poly(profile.monomial(Diffeomorphism.generic(3))) == "a1^2"


class TestLodayInversion:

    def test_low_orders(self):
        r = loday_inverse(Diffeomorphism.generic(4), 4)
        assert [format_poly(c) for c in r.coefficients] == [
            "0", "1", "-a1", "2*a1^2 - a2", "-5*a1^3 + 5*a1*a2 - a3"
        ]

    @pytest.mark.parametrize("order", range(1, 9))
    def test_agrees_with_series_inversion(self, order):
        F = Diffeomorphism.generic(order)
        assert loday_inverse(F, order) == invert(series_from_diffeo(F, order))

    def test_reports(self):
        assert check_loday(6).passed
        report = check_plane_tree_counts(8)
        assert report.passed, report.render()
        assert len(report.checks) == 8
