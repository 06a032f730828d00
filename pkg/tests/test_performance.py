"""
Acceptance runs with wall-clock limits.

Run with ``pytest -m performance``; everything here is also marked slow.
"""
import time

import pytest

from app.amplitudes import (
    FeynmanRules,
    KinematicSampler,
    b_closed,
    b_direct,
    b_inverse,
    b_recurrence,
    point_independent,
)
from app.bell import (
    check_cvijovic,
    check_genfunc_definition,
    check_lemma_localization,
    check_oracle_agreement,
    check_starter,
)
from app.diffeoeq import check_ode, check_recurrence2, check_recurrence3, check_smatrix
from app.exactalg import format_poly
from app.legendre import check_legendre_b_relation, check_loday
from app.models import RunConfig
from app.series import Diffeomorphism
from app.verification import run_suites

pytestmark = [pytest.mark.performance, pytest.mark.slow]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start
        print(f"elapsed: {self.seconds:.2f}s")


def assert_passed(*reports):
    for report in reports:
        assert report.passed, report.render()


class TestAmplitudes:

    def test_known_values_by_every_route(self):
        expected = {1: "1", 2: "-2*a1", 3: "12*a1^2 - 6*a2"}
        with Timer() as timer:
            rules = FeynmanRules(Diffeomorphism.generic(3))
            sampler = KinematicSampler(seed=42)
            for n, value in expected.items():
                pt = sampler.sample(n)
                for poly in (b_direct(n, rules, pt), b_recurrence(n, rules, pt), b_closed(n), b_inverse(n)):
                    assert format_poly(poly) == value
        assert timer.seconds < 1

    def test_four_way_agreement(self):
        with Timer() as timer:
            F = Diffeomorphism.generic(10)
            rules = FeynmanRules(F)
            pt = KinematicSampler(seed=42).sample(6)
            closed = b_closed(6, F)
            assert b_direct(6, rules, pt) == closed
            assert b_recurrence(6, rules, pt) == closed
            for n in range(1, 11):
                assert b_closed(n, F) == b_inverse(n, F)
        assert timer.seconds < 60

    def test_kinematic_independence(self):
        with Timer() as timer:
            F = Diffeomorphism.generic(6)
            rules = FeynmanRules(F)
            sampler = KinematicSampler(seed=42)
            for n in range(1, 7):
                assert point_independent(n, rules, sampler.sample_many(n, 20))
        assert timer.seconds < 120


class TestIdentitySuites:

    def test_bell(self):
        with Timer() as timer:
            assert_passed(
                check_genfunc_definition(12, 12),
                check_lemma_localization(12),
                check_starter(12),
                check_cvijovic(12),
                check_oracle_agreement(10),
            )
        assert timer.seconds < 120

    def test_ode(self):
        with Timer() as timer:
            assert_passed(check_ode(10))
        assert timer.seconds < 30

    def test_recurrences(self):
        with Timer() as timer:
            assert_passed(check_recurrence2(10), check_recurrence3(10))
        assert timer.seconds < 60

    def test_smatrix(self):
        with Timer() as timer:
            assert_passed(check_smatrix(8))
        assert timer.seconds < 30

    def test_legendre(self):
        with Timer() as timer:
            assert_passed(check_legendre_b_relation(10), check_loday(8))
        assert timer.seconds < 60


class TestDeterminism:

    def test_all_suites_twice(self):
        cfg = RunConfig(order=8, trials=20, seed=42)
        first = [r.model_dump_json() for r in run_suites(["all"], cfg)]
        second = [r.model_dump_json() for r in run_suites(["all"], cfg)]
        assert first == second
