from pathlib import Path

import pytest

from vhardy.config import ALL_SUITES, OUTPUT_ENV, SuiteConfig

ROOT = Path(__file__).resolve().parents[1]


def test_default_yaml_matches_dataclass():
    assert SuiteConfig.load(ROOT / "configs" / "default.yaml") == SuiteConfig()


def test_round_trip_dict():
    cfg = SuiteConfig(seed=5, suites=("tent",))
    assert SuiteConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("bad", [{"suites": ["nope"]}, {"exponent": "paper-x"}, {"typo": 1},
                                 {"trials": 0}])
def test_validation(bad):
    with pytest.raises(ValueError):
        SuiteConfig.from_dict(bad)


def test_override_and_output_dir(monkeypatch):
    cfg = SuiteConfig().override(seed=3, grid_points=512, output_dir=None)
    assert cfg.seed == 3 and cfg.grid.points == 512 and cfg.suites == ALL_SUITES
    monkeypatch.setenv(OUTPUT_ENV, "/tmp/somewhere")
    assert str(cfg.resolved_output_dir()) == "/tmp/somewhere"
    assert str(cfg.override(output_dir="x").resolved_output_dir()) == "x"
