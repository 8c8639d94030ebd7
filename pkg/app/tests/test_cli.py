"""
Tests for the command-line front end
"""

import json

import numpy as np
import pytest

from app.cli import _run_check, build_parser, load_config, main
from app.core.exceptions import AcceptanceFailure
from app.schemas.scenario import ScenarioKind
from app.services.acceptance import AcceptanceItem, AcceptanceReport

SMALL_GRID = {
    "grid_rho": {"min": 0.5, "max": 1.5, "count": 3},
    "grid_xi": {"min": 0.1, "max": 1.0, "count": 2, "spacing": "log"},
}


@pytest.fixture
def fig1_config(tmp_path):
    path = tmp_path / "fig1.json"
    path.write_text(json.dumps(SMALL_GRID))
    return path


@pytest.mark.unit
class TestLoadConfig:
    """Merging of config file, flags and overrides"""

    def test_flags_override_file(self, fig1_config):
        args = build_parser().parse_args(["fig1", "--config", str(fig1_config), "--lambda", "0.2", "--E0", "1.5"])
        config = load_config(args, ScenarioKind.FIG1_SUDDEN_GRID)
        assert config.params.lam == 0.2
        assert config.params.E0 == 1.5
        assert config.grid_rho.count == 3

    def test_partial_tau_sweep_is_completed(self):
        args = build_parser().parse_args(["fig2", "--count", "3"])
        config = load_config(args, ScenarioKind.FIG2_TRANSIENT_SWEEP)
        assert config.sweep.parameter == "tau"
        assert config.sweep.count == 3
        assert config.sweep.min == pytest.approx(1e-3)

    def test_set_overrides(self):
        args = build_parser().parse_args(
            ["fig1", "--set", "numerics.norm_tol=1e-9", "--set", "params.lambda=0.2"]
        )
        config = load_config(args, ScenarioKind.FIG1_SUDDEN_GRID)
        assert config.numerics.norm_tol == 1e-9
        assert config.params.lam == 0.2

    def test_malformed_override(self):
        args = build_parser().parse_args(["fig1", "--set", "norm_tol"])
        with pytest.raises(ValueError):
            load_config(args, ScenarioKind.FIG1_SUDDEN_GRID)


@pytest.mark.integration
class TestMain:
    """Exit codes and written files"""

    def test_fig1_writes_file(self, fig1_config, tmp_path):
        output = tmp_path / "grid.csv"
        assert main(["fig1", "--config", str(fig1_config), "--output", str(output)]) == 0
        assert np.loadtxt(output, delimiter=",").shape == (6, 3)

    def test_invalid_value(self, capsys):
        assert main(["fig1", "--E0", "-1"]) == 1
        assert "invalid configuration" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"colour": "blue"}))
        assert main(["fig1", "--config", str(path)]) == 1

    def test_unreadable_config(self, tmp_path):
        assert main(["fig1", "--config", str(tmp_path / "missing.json")]) == 1

    def test_short_window_is_numerical_failure(self, capsys):
        assert main(["fig3", "--t-min", "-1", "--t-max", "1"]) == 2
        assert "WindowTooShortError" in capsys.readouterr().err

    def test_shake(self, tmp_path, capsys):
        output = tmp_path / "shake.csv"
        assert main(["shake", "--lambda", "0.05", "--output", str(output)]) == 0
        assert "w_shake," in output.read_text()
        assert str(output) in capsys.readouterr().out

    def test_quick_check(self, tmp_path, capsys):
        output = tmp_path / "acceptance.csv"
        assert main(["check", "--quick", "--only", "3", "6", "8", "12", "--output", str(output)]) == 0
        body = [line for line in output.read_text().splitlines() if not line.startswith("#")]
        assert len(body) == 4
        assert capsys.readouterr().out.count("PASS") == 4

    def test_failed_check(self, tmp_path, monkeypatch, capsys):
        def failing_run(self, only=None):
            return AcceptanceReport(items=[AcceptanceItem(1, "sudden DCE closed form", False, "off", 0.0)])

        monkeypatch.setattr("app.cli.AcceptanceSuite.run", failing_run)
        assert main(["check", "--output", str(tmp_path / "acceptance.csv")]) == 3
        assert "AcceptanceFailure: acceptance failed: items 1" in capsys.readouterr().err
        assert (tmp_path / "acceptance.csv").exists()

    def test_failed_check_raises_acceptance_failure(self, tmp_path, monkeypatch):
        def failing_run(self, only=None):
            return AcceptanceReport(items=[
                AcceptanceItem(1, "sudden DCE closed form", True, "ok", 0.0),
                AcceptanceItem(7, "efficiency F", False, "off", 0.0),
            ])

        monkeypatch.setattr("app.cli.AcceptanceSuite.run", failing_run)
        args = build_parser().parse_args(["check", "--output", str(tmp_path / "acceptance.csv")])
        with pytest.raises(AcceptanceFailure) as exc_info:
            _run_check(args)
        assert exc_info.value.details["failed"] == [7]
        assert exc_info.value.exit_code == 3

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "casimir-sim" in capsys.readouterr().out
