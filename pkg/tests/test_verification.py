"""
Tests for the suite registry, the threaded runner and run configuration loading.
"""
import json

import pytest

from app import verification
from app.config import load_run_config, settings, worker_count
from app.exceptions import ConfigurationError, UnknownIndeterminate
from app.models import OutputFormat, RunConfig
from app.verification import BELL_SUITES, SUITES, available_suites, expand_suites, run_suite, run_suites


class TestSuiteNames:

    def test_all_expands_in_registry_order(self):
        assert expand_suites(["all"]) == list(SUITES)
        assert available_suites()[-1] == "all"

    def test_duplicates_and_order(self):
        assert expand_suites(["series", "bell", "series"]) == ["bell", "series"]

    def test_unknown_suite(self):
        with pytest.raises(ConfigurationError) as excinfo:
            expand_suites(["series", "nope"])
        assert excinfo.value.details == {"setting_name": "suite"}

    def test_bell_suites_are_registered(self):
        assert set(BELL_SUITES) <= set(SUITES)


class TestRunner:

    def test_single_suite(self, small_run_config):
        reports = run_suite("starter", small_run_config)
        assert [r.suite for r in reports] == ["starter"]
        assert reports[0].passed

    def test_reports_come_back_in_registry_order(self, small_run_config, monkeypatch):
        monkeypatch.setattr(settings, "threads", 4)
        reports = run_suites(["smatrix", "series", "starter"], small_run_config)
        assert [r.suite for r in reports] == ["starter", "series", "smatrix"]
        assert all(r.passed for r in reports)

    def test_threads_do_not_change_results(self, small_run_config, monkeypatch):
        names = ["amplitudes", "recurrences"]
        monkeypatch.setattr(settings, "threads", 1)
        serial = [r.model_dump() for r in run_suites(names, small_run_config)]
        monkeypatch.setattr(settings, "threads", 2)
        threaded = [r.model_dump() for r in run_suites(names, small_run_config)]
        assert serial == threaded

    def test_tree_routes_are_capped(self, monkeypatch):
        monkeypatch.setattr(settings, "max_tree_legs", 3)
        monkeypatch.setattr(settings, "max_tree_count_legs", 4)
        reports = {r.suite: r for r in SUITES["amplitudes"](RunConfig(order=8, trials=1, seed=1))}
        assert reports["routes"].parameters["n_max_tree"] == 3
        assert reports["tree_counts"].parameters == {"n_max": 4}

    @pytest.mark.slow
    def test_tree_counts_reach_seven_legs(self):
        reports = {r.suite: r for r in SUITES["amplitudes"](RunConfig(order=7, trials=1, seed=1))}
        assert reports["tree_counts"].parameters == {"n_max": 7}
        assert reports["tree_counts"].passed

    def test_failures_are_logged(self, small_run_config, monkeypatch, caplog):
        from app.models import CheckResult, build_report

        failing = build_report("fake", [CheckResult(identity="demo", passed=False, lhs="1", rhs="2")])
        monkeypatch.setitem(verification.SUITES, "series", lambda cfg: [failing])
        with caplog.at_level("ERROR", logger="app.verification"):
            reports = run_suite("series", small_run_config)
        assert not reports[0].passed
        messages = [record.getMessage() for record in caplog.records]
        assert "Identity check failed" in messages
        assert "Suite failed" in messages


class TestWorkerCount:

    def test_capped_by_setting(self, monkeypatch):
        monkeypatch.setattr(settings, "threads", 3)
        assert worker_count() == 3
        assert worker_count(8) == 3
        assert worker_count(2) == 2
        assert worker_count(0) == 1

    def test_never_below_one(self, monkeypatch):
        monkeypatch.setattr(settings, "threads", 0)
        assert worker_count() == 1


class TestRunConfig:

    def test_defaults_come_from_settings(self):
        cfg = load_run_config(None, {})
        assert (cfg.order, cfg.trials, cfg.seed) == (
            settings.default_order, settings.default_trials, settings.default_seed
        )
        assert cfg.suites == ["all"]
        assert cfg.output == OutputFormat.TABLE

    def test_file_then_overrides(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"order": 5, "trials": 3, "coeff_substitutions": {"a1": "2/4"}}))
        cfg = load_run_config(str(path), {"trials": 9, "seed": None})
        assert (cfg.order, cfg.trials, cfg.seed) == (5, 9, settings.default_seed)
        assert cfg.coeff_substitutions == {"a1": "1/2"}

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError):
            load_run_config(str(path), {})
        with pytest.raises(ConfigurationError):
            load_run_config(str(tmp_path / "missing.json"), {})

    @pytest.mark.parametrize("overrides", [{"order": 0}, {"trials": 0}, {"seed": -1}, {"seed": 2**64}])
    def test_out_of_range(self, overrides):
        with pytest.raises(ConfigurationError):
            load_run_config(None, overrides)

    def test_unknown_coefficient_name(self):
        with pytest.raises(UnknownIndeterminate):
            RunConfig(coeff_substitutions={"b1": "2"})
