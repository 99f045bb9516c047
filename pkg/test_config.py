import pytest

from src.config import Settings
from src.errors import ConfigError
from src.optimizer import OptimizerConfig


def test_defaults(monkeypatch):
    for name in ("MICI_POPULATION", "MICI_SAMPLER", "MICI_VALIDATE_POPULATION"):
        monkeypatch.delenv(name, raising=False)
    s = Settings()
    assert (s.population, s.sampler, s.validate_population) == (30, "me", False)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("MICI_POPULATION", "40")
    monkeypatch.setenv("MICI_SAMPLER", "VI")
    monkeypatch.setenv("MICI_VALIDATE_POPULATION", "yes")
    s = Settings()
    assert (s.population, s.sampler, s.validate_population) == (40, "vi", True)


@pytest.mark.parametrize("name,raw", [
    ("MICI_POPULATION", "thirty"),
    ("MICI_SAMPLER", "random"),
    ("MICI_VALIDATE_POPULATION", "maybe"),
])
def test_bad_values(monkeypatch, name, raw):
    monkeypatch.setenv(name, raw)
    with pytest.raises(ConfigError):
        Settings()


def test_explicit_overrides_beat_settings():
    cfg = OptimizerConfig.from_settings(population=8, eta=None)
    assert cfg.population == 8 and cfg.eta == 0.8
