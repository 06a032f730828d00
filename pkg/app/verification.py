"""
Verification suites: registry and runner.

A suite maps a RunConfig to a list of Reports. ``run_suites`` expands ``all``,
runs the selected suites on a thread pool capped by DIFFEO_THREADS and returns
the reports in registry order, whatever order the threads finish in.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List

from app import amplitudes, bell, diffeoeq, legendre, series
from app.config import settings, worker_count
from app.exceptions import ConfigurationError
from app.logging_config import get_structured_logger
from app.models import Report, RunConfig

logger = get_structured_logger(__name__)

SuiteRunner = Callable[[RunConfig], List[Report]]


def _tree_legs(cfg: RunConfig) -> int:
    return min(cfg.order, settings.max_tree_legs)


def _bell_nmax(cfg: RunConfig) -> int:
    return max(cfg.order, 1)


def _genfunc(cfg: RunConfig) -> List[Report]:
    n = _bell_nmax(cfg)
    return [bell.check_genfunc_definition(n, n)]


def _localization(cfg: RunConfig) -> List[Report]:
    return [bell.check_lemma_localization(_bell_nmax(cfg))]


def _starter(cfg: RunConfig) -> List[Report]:
    return [bell.check_starter(_bell_nmax(cfg))]


def _cvijovic(cfg: RunConfig) -> List[Report]:
    return [bell.check_cvijovic(_bell_nmax(cfg))]


def _bell(cfg: RunConfig) -> List[Report]:
    # set-partition enumeration gets slow past n = 10
    return [
        bell.check_oracle_agreement(min(cfg.order, 10)),
        bell.check_specializations(_bell_nmax(cfg)),
    ]


def _series(cfg: RunConfig) -> List[Report]:
    return [series.check_series_laws(cfg.order)]


def _amplitudes(cfg: RunConfig) -> List[Report]:
    legs = _tree_legs(cfg)
    reports = [
        amplitudes.check_routes(legs, cfg.order, cfg.seed),
        amplitudes.check_tree_counts(min(cfg.order, settings.max_tree_count_legs)),
        amplitudes.check_homogeneity(cfg.order),
        amplitudes.check_split_parts(legs, cfg.seed),
    ]
    if legs >= 2:
        reports.append(amplitudes.onshell_amplitude_check(legs + 1, cfg.trials, cfg.seed))
    return reports


def _ode(cfg: RunConfig) -> List[Report]:
    order = max(cfg.order, 3)
    return [diffeoeq.check_ode(order), diffeoeq.check_ode_recurrence_equivalence(order)]


def _recurrences(cfg: RunConfig) -> List[Report]:
    return [diffeoeq.check_recurrence2(cfg.order), diffeoeq.check_recurrence3(cfg.order)]


def _smatrix(cfg: RunConfig) -> List[Report]:
    return [diffeoeq.check_smatrix(cfg.order)]


def _legendre(cfg: RunConfig) -> List[Report]:
    order = max(cfg.order, 2)
    return [
        legendre.check_legendre_b_relation(order),
        legendre.check_loday(order),
        legendre.check_plane_tree_counts(order),
        legendre.check_involution(legendre.random_action(order + 2, cfg.seed), order),
    ]


SUITES: Dict[str, SuiteRunner] = {
    "genfunc": _genfunc,
    "localization": _localization,
    "starter": _starter,
    "cvijovic": _cvijovic,
    "bell": _bell,
    "series": _series,
    "amplitudes": _amplitudes,
    "ode": _ode,
    "recurrences": _recurrences,
    "smatrix": _smatrix,
    "legendre": _legendre,
}

BELL_SUITES = ("genfunc", "localization", "starter", "cvijovic")


def expand_suites(names: Iterable[str]) -> List[str]:
    """Resolve ``all`` and drop duplicates, keeping registry order."""
    requested = set()
    for name in names:
        if name == "all":
            requested.update(SUITES)
        elif name in SUITES:
            requested.add(name)
        else:
            raise ConfigurationError("suite", f"unknown suite '{name}', choose from {available_suites()}")
    return [name for name in SUITES if name in requested]


def available_suites() -> List[str]:
    return list(SUITES) + ["all"]


def run_suite(name: str, cfg: RunConfig) -> List[Report]:
    start = time.perf_counter()
    logger.suite_started(name, order=cfg.order, trials=cfg.trials, seed=cfg.seed)
    reports = SUITES[name](cfg)
    checks = sum(len(r.checks) for r in reports)
    failed = sum(len(r.failures) for r in reports)
    for report in reports:
        for check in report.failures:
            logger.check_failed(check.identity, check.params, check.lhs or "", check.rhs or "")
    logger.suite_completed(
        name, failed == 0, checks, failed, (time.perf_counter() - start) * 1000
    )
    return reports


def run_suites(names: Iterable[str], cfg: RunConfig) -> List[Report]:
    """
    Run the named suites and collect their reports

    Args:
        names: suite names, ``all`` expanding to every registered suite
        cfg: validated run parameters

    Returns:
        Reports in registry order

    Raises:
        ConfigurationError: if a suite name is unknown
    """
    selected = expand_suites(names)
    with ThreadPoolExecutor(max_workers=worker_count(len(selected))) as pool:
        batches = list(pool.map(lambda name: run_suite(name, cfg), selected))
    return [report for batch in batches for report in batch]
