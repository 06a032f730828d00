"""
Basic smoke test to verify test infrastructure.
"""
from app import __version__
from app.config import Settings, settings
from app.exactalg import format_poly, parse_poly
from app.series import Diffeomorphism, invert, series_from_diffeo, to_egf


def test_basic_setup():
    """Test that basic test setup works."""
    assert True


def test_settings_creation(test_settings):
    assert test_settings.log_level == "DEBUG"
    assert test_settings.json_logging is False
    assert test_settings.threads == 2


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("DIFFEO_THREADS", "4")
    monkeypatch.setenv("DIFFEO_DEFAULT_SEED", "7")
    fresh = Settings()
    assert fresh.threads == 4
    assert fresh.default_seed == 7


def test_version_matches_settings():
    assert __version__ == settings.version


def test_polynomial_round_trip(b3_poly):
    assert format_poly(parse_poly(b3_poly)) == b3_poly


def test_inverse_of_generic_diffeo(b3_poly):
    G = to_egf(invert(series_from_diffeo(Diffeomorphism.generic(3))))
    assert format_poly(G.coefficient(3)) == b3_poly
