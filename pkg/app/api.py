import logging
import time
from datetime import datetime, timezone
from typing import Optional

import psutil
from fastapi import APIRouter, Query

from app import amplitudes, bell, legendre, verification
from app.config import load_run_config, settings, worker_count
from app.exactalg import format_poly, parse_substitution, split_assignments
from app.exceptions import VerificationFailure
from app.models import (
    BellResult,
    BnResult,
    HealthResponse,
    LegendreResult,
    SeriesDocument,
    VerificationRun,
)
from app.series import Diffeomorphism, invert, series_from_diffeo, series_to_document, to_egf

logger = logging.getLogger(__name__)

# Create router
router = APIRouter()

_STARTED = time.monotonic()

# Symbolic work grows fast with the order; the HTTP surface stays below these
MAX_ORDER = 16
MAX_BELL_N = 24


@router.get("/health", response_model=HealthResponse)
def health_check():
    """
    Health check endpoint

    Returns:
        HealthResponse with uptime and the registered suites
    """
    return HealthResponse(
        status="healthy",
        timestamp=datetime.now(timezone.utc).isoformat(),
        uptime_seconds=round(time.monotonic() - _STARTED, 3),
        version=settings.version,
        suites=verification.available_suites(),
        memory_rss_mb=round(psutil.Process().memory_info().rss / (1024**2), 2),
        worker_threads=worker_count(),
    )


@router.get("/bn/{n}", response_model=BnResult)
def get_bn(
    n: int,
    method: str = Query("closed", pattern="^(direct|recurrence|closed|inverse)$"),
    coeffs: Optional[str] = Query(None, description="Coefficient values, e.g. a1=2,a2=1/3"),
    trials: int = Query(5, ge=1, le=100),
    seed: int = Query(42, ge=0),
):
    """
    Compute b_n by one of the four routes

    Args:
        n: number of on-shell legs
        method: direct, recurrence, closed or inverse

    Returns:
        BnResult; the tree routes also report whether b_n was the same at every point
    """
    limit = settings.max_tree_legs if method in ("direct", "recurrence") else MAX_ORDER
    if not 1 <= n <= limit:
        raise ValueError(f"n must lie in 1..{limit} for method '{method}'")
    cfg = load_run_config(
        None, {"coeff_substitutions": split_assignments(coeffs), "trials": trials, "seed": seed}
    )
    diffeo = Diffeomorphism.with_assignments(n, cfg.coeff_substitutions)

    if method in ("direct", "recurrence"):
        rules = amplitudes.FeynmanRules(diffeo)
        evaluate = amplitudes.b_direct if method == "direct" else amplitudes.b_recurrence
        points = amplitudes.KinematicSampler(cfg.seed).sample_many(n, cfg.trials)
        values = [evaluate(n, rules, pt) for pt in points]
        logger.info(f"b_{n} by {method} at {len(points)} points")
        return BnResult(
            n=n,
            method=method,
            poly=format_poly(values[0]),
            trials=cfg.trials,
            point_independent=len(set(values)) == 1,
        )
    value = amplitudes.b_closed(n, diffeo) if method == "closed" else amplitudes.b_inverse(n, diffeo)
    return BnResult(n=n, method=method, poly=format_poly(value))


@router.get("/bell", response_model=BellResult)
def get_bell(
    n: int = Query(..., ge=0, le=MAX_BELL_N),
    k: int = Query(..., ge=0, le=MAX_BELL_N),
    subst: Optional[str] = Query(None, description="Argument values, e.g. x1=1,x2=2*a1"),
):
    """Partial Bell polynomial B_{n,k}(x1, x2, ...), optionally with arguments substituted."""
    poly = bell.bell_fast(n, k, bell.BellArgs.symbolic())
    mapping = parse_substitution(subst)
    if mapping:
        poly = poly.substitute(mapping)
    return BellResult(n=n, k=k, poly=format_poly(poly))


@router.get("/inverse", response_model=SeriesDocument)
def get_inverse(
    order: int = Query(8, ge=1, le=MAX_ORDER),
    coeffs: Optional[str] = Query(None),
):
    """EGF of F^{-1}; coefficient n is b_n."""
    cfg = load_run_config(None, {"order": order, "coeff_substitutions": split_assignments(coeffs)})
    diffeo = Diffeomorphism.with_assignments(cfg.order, cfg.coeff_substitutions)
    return series_to_document(to_egf(invert(series_from_diffeo(diffeo, cfg.order))))


@router.get("/legendre", response_model=LegendreResult)
def get_legendre(
    order: int = Query(6, ge=2, le=MAX_ORDER),
    coeffs: Optional[str] = Query(None),
):
    """Legendre transform of the action of F and the tree series L_n = b_{n-1}."""
    cfg = load_run_config(None, {"order": order, "coeff_substitutions": split_assignments(coeffs)})
    diffeo = Diffeomorphism.with_assignments(cfg.order + 1, cfg.coeff_substitutions)
    A = legendre.build_A(diffeo, cfg.order + 1)
    return LegendreResult(
        order=cfg.order,
        transform=series_to_document(legendre.legendre_transform(A, cfg.order)),
        tree_series=series_to_document(legendre.tree_series(A, cfg.order)),
        report=legendre.check_legendre_b_relation(cfg.order, diffeo),
    )


@router.get("/verify/{suite}", response_model=VerificationRun)
def verify_suite(
    suite: str,
    order: int = Query(6, ge=1, le=10),
    trials: int = Query(3, ge=1, le=50),
    seed: int = Query(42, ge=0),
):
    """
    Run one verification suite (or ``all``)

    Raises:
        VerificationFailure: if any check fails; the handler answers 422
    """
    cfg = load_run_config(None, {"order": order, "trials": trials, "seed": seed, "suites": [suite]})
    reports = verification.run_suites(cfg.suites, cfg)
    run = VerificationRun(
        passed=all(r.passed for r in reports),
        parameters={"order": cfg.order, "trials": cfg.trials, "seed": cfg.seed},
        reports=reports,
    )
    if not run.passed:
        failures = [
            {"suite": r.suite, **check.model_dump()} for r in reports for check in r.failures
        ]
        raise VerificationFailure(suite, failures)
    return run
