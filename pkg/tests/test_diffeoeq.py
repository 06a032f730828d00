"""
Tests for the P/Q construction, both differential equations, the split
recurrences and the S-matrix of the interacting theory.
"""
import pytest

from app.amplitudes import b_values
from app.bell import BellArgs
from app.diffeoeq import (
    InteractingTheory,
    W_coeff,
    build_pq,
    check_ode,
    check_ode_recurrence_equivalence,
    check_recurrence2,
    check_recurrence3,
    check_smatrix,
    ode1_residual,
    ode2_residual,
    p_coeff,
    q_coeff,
    recurrence2_lhs,
    recurrence3_lhs,
    smatrix_table,
    w_coeff,
)
from app.exactalg import ONE, ZERO, Polynomial, format_poly, l_var
from app.series import Diffeomorphism, invert, series_from_diffeo, to_egf


@pytest.fixture
def F6() -> Diffeomorphism:
    return Diffeomorphism.generic(7)


class TestPQ:

    def test_low_coefficients(self, F6):
        assert q_coeff(F6, 0) == ZERO and p_coeff(F6, 0) == ZERO
        assert q_coeff(F6, 1) == ONE and p_coeff(F6, 1) == ONE
        assert format_poly(q_coeff(F6, 2)) == "6*a1"
        assert format_poly(p_coeff(F6, 2)) == "4*a1"

    def test_closed_form_agrees_with_calculus(self, F6):
        pack = build_pq(F6, 6)
        assert pack.order == 6
        assert pack.F == series_from_diffeo(F6, 6)

    def test_closed_form_at_order_15(self):
        pack = build_pq(Diffeomorphism.generic(16), 15)
        assert pack.order == 15
        assert format_poly(pack.Q.coefficient(15)) != "0"

    def test_identity_diffeo(self):
        pack = build_pq(Diffeomorphism.identity(5), 4)
        # Q = P = t
        assert [format_poly(c) for c in pack.Q.coefficients] == ["0", "1", "0", "0", "0"]
        assert pack.P == pack.Q


class TestDifferentialEquations:

    @pytest.mark.parametrize("order", [3, 6, 9])
    def test_inverse_solves_both(self, order):
        F = Diffeomorphism.generic(order + 1)
        pack = build_pq(F, order)
        G = to_egf(invert(series_from_diffeo(F, order)))
        assert ode1_residual(G, pack).is_zero()
        assert ode2_residual(G, pack).is_zero()

    def test_numeric_diffeo(self):
        F = Diffeomorphism.with_assignments(7, {f"a{j}": str(j * j - 3) for j in range(1, 7)})
        pack = build_pq(F, 6)
        G = to_egf(invert(series_from_diffeo(F, 6)))
        assert ode1_residual(G, pack).is_zero()
        assert ode2_residual(G, pack).is_zero()

    def test_control_does_not_solve(self, F6):
        pack = build_pq(F6, 6)
        G = to_egf(series_from_diffeo(F6, 6))
        assert not ode1_residual(G, pack).is_zero()
        assert not ode2_residual(G, pack).is_zero()

    def test_second_residual_loses_two_orders(self, F6):
        pack = build_pq(F6, 6)
        G = to_egf(invert(series_from_diffeo(F6, 6)))
        assert ode1_residual(G, pack).truncation == 6
        assert ode2_residual(G, pack).truncation == 4

    def test_ode_report(self):
        report = check_ode(6)
        assert report.passed, report.render()
        assert {c.identity for c in report.checks} == {
            "pq_routes", "ode1_inverse", "ode2_inverse", "ode1_control", "ode2_control"
        }

    def test_ode_report_needs_order_three(self):
        with pytest.raises(ValueError):
            check_ode(2)


class TestRecurrences:

    @pytest.mark.parametrize("n", range(1, 8))
    def test_both_vanish_on_tree_amplitudes(self, n):
        F = Diffeomorphism.generic(n + 1)
        args = BellArgs(b_values(n, F))
        assert recurrence2_lhs(n, F, args) == ZERO
        assert recurrence3_lhs(n, F, args) == ZERO

    def test_do_not_vanish_for_generic_b(self):
        F = Diffeomorphism.generic(5)
        args = BellArgs.symbolic()
        assert recurrence2_lhs(3, F, args) != ZERO
        assert recurrence3_lhs(3, F, args) != ZERO

    @pytest.mark.parametrize(
        "check", [check_recurrence2, check_recurrence3, check_ode_recurrence_equivalence]
    )
    def test_reports(self, check):
        report = check(7)
        assert report.passed, report.render()

    def test_small_orders(self):
        assert check_recurrence3(1).passed
        report = check_ode_recurrence_equivalence(1)
        assert [c.identity for c in report.checks] == ["ode1_coefficients"]


class TestSMatrix:

    def test_coupling_defaults_to_symbol(self):
        theory = InteractingTheory(Diffeomorphism.generic(5))
        assert theory.coupling(4) == Polynomial.variable(l_var(4))
        assert InteractingTheory(Diffeomorphism.generic(5), {3: Polynomial.constant(7)}).coupling(3) == 7

    def test_couplings_start_at_cubic(self):
        with pytest.raises(ValueError):
            InteractingTheory(Diffeomorphism.generic(5), {2: ONE})
        with pytest.raises(ValueError):
            InteractingTheory(Diffeomorphism.generic(5)).coupling(2)

    def test_transformed_vertices(self):
        theory = InteractingTheory(Diffeomorphism.generic(5))
        assert w_coeff(theory, 3, 2) == ZERO
        assert format_poly(w_coeff(theory, 3, 3)) == "l3"
        assert format_poly(w_coeff(theory, 3, 4)) == "12*a1*l3"

    @pytest.mark.parametrize("s", [3, 4, 5])
    def test_only_the_bare_coupling_survives(self, s):
        theory = InteractingTheory(Diffeomorphism.generic(8))
        for n in range(1, 9):
            expected = theory.coupling(s) if n == s else ZERO
            assert W_coeff(theory, s, n) == expected

    def test_table(self):
        theory = InteractingTheory(Diffeomorphism.generic(5))
        entries = smatrix_table(theory, 5)
        assert len(entries) == 15
        nonzero = {(e.s, e.n): e.poly for e in entries if e.poly != "0"}
        assert nonzero == {(3, 3): "l3", (4, 4): "l4", (5, 5): "l5"}

    def test_report(self):
        report = check_smatrix(8)
        assert report.passed, report.render()
        assert len(report.checks) == 24
