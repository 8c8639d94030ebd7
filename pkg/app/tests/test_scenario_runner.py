"""
Tests for scenario configuration and orchestration
"""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import ResonanceError
from app.schemas.model import ModelParams
from app.schemas.scenario import AxisSpec, ScenarioConfig, ScenarioKind, SweepSpec
from app.services.scenario_runner import ScenarioRunner, sudden_w_up


def small_fig1(**overrides):
    data = {
        "scenario": "fig1_sudden_grid",
        "grid_rho": {"min": 0.5, "max": 1.5, "count": 3},
        "grid_xi": {"min": 0.1, "max": 1.0, "count": 2, "spacing": "log"},
    }
    data.update(overrides)
    return ScenarioConfig.model_validate(data)


@pytest.mark.unit
class TestScenarioConfig:
    """Validation of scenario files"""

    def test_lambda_alias_in_params(self):
        config = ScenarioConfig.model_validate({"scenario": "shaking_report", "params": {"lambda": 0.05}})
        assert config.params.lam == 0.05

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"scenario": "fig1_sudden_grid", "colour": "blue"})
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"scenario": "fig1_sudden_grid", "params": {"E_0": 1.0}})

    def test_invalid_physics_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"scenario": "fig1_sudden_grid", "params": {"E0": -1.0}})

    def test_custom_needs_sweep(self):
        with pytest.raises(ValidationError, match="sweep"):
            ScenarioConfig.model_validate({"scenario": "custom"})

    def test_tau_sweeps_only(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({
                "scenario": "fig2_transient_sweep",
                "sweep": {"parameter": "lambda", "min": 0.01, "max": 0.02, "count": 2},
            })

    def test_sweep_parameter_names(self):
        assert SweepSpec(parameter="lambda", min=0.01, max=0.05, count=3).parameter == "lam"
        with pytest.raises(ValidationError):
            SweepSpec(parameter="detuning", min=0.01, max=0.05, count=3)

    def test_axis_bounds(self):
        with pytest.raises(ValidationError):
            AxisSpec(min=0.0, max=1.0, count=3, spacing="log")
        with pytest.raises(ValidationError):
            AxisSpec(min=2.0, max=1.0, count=3)
        np.testing.assert_allclose(AxisSpec(min=1.0, max=100.0, count=3, spacing="log").values(), [1.0, 10.0, 100.0])

    def test_rho_grid_contains_one(self):
        config = small_fig1(grid_rho={"min": 0.5, "max": 2.0, "count": 4, "spacing": "log"})
        values = config.rho_values()
        assert len(values) == 5
        assert 1.0 in values
        assert np.all(np.diff(values) > 0)


@pytest.mark.integration
class TestScenarioRunner:
    """Scenario handlers and file output"""

    def test_fig1_grid(self, runner):
        result = runner.run(small_fig1())
        assert result.columns == ["rho", "xi", "w_up"]
        assert len(result.rows) == 6
        for rho, xi, w_up in result.rows:
            if rho == 1.0:
                assert w_up == 0.0
            else:
                assert 0.0 < w_up < 0.5
        table = np.loadtxt(result.output_path, delimiter=",")
        assert table.shape == (6, 3)
        assert result.exit_code == 0

    def test_results_independent_of_worker_count(self, runner, exporter):
        serial = ScenarioRunner(workers=1, exporter=exporter)
        try:
            assert serial.run(small_fig1(), write=False).rows == runner.run(small_fig1(), write=False).rows
        finally:
            serial.executor.shutdown(wait=True)

    def test_header_records_grid(self, runner):
        result = runner.run(small_fig1())
        text = result.output_path.read_text()
        assert "# scenario: fig1_sudden_grid" in text
        assert "# grid_rho: " in text
        assert "# artifact: casimir-sim" in text

    def test_fig2_sweep(self, runner):
        config = ScenarioConfig.model_validate({
            "scenario": "fig2_transient_sweep",
            "sweep": {"parameter": "tau", "min": 0.5, "max": 1.0, "count": 2},
        })
        result = runner.run(config, write=False)
        assert result.output_path is None
        assert [row[0] for row in result.rows] == [0.5, 1.0]
        for tau, F, w_up, n_dce, tail_error in result.rows:
            assert F > 1.0
            assert w_up == pytest.approx((0.01 / 4.2) ** 2 * n_dce * F, rel=1e-12)

    def test_errors_carry_scenario_context(self, runner):
        config = ScenarioConfig.model_validate({
            "scenario": "fig2_transient_sweep",
            "params": {"E0": 5.0},
            "sweep": {"parameter": "tau", "min": 0.5, "max": 1.0, "count": 2},
        })
        with pytest.raises(ResonanceError) as exc_info:
            runner.run(config)
        assert exc_info.value.message.startswith("scenario fig2_transient_sweep: tau=0.5")

    def test_fig3_trace(self, runner):
        result = runner.run(ScenarioConfig(scenario=ScenarioKind.FIG3_BETA_TRACE))
        summary = json.loads(result.metadata["summary"])
        assert summary["max_over_final"] > 1.0
        assert summary["symplectic_drift"] < 1e-8
        assert result.notes
        table = np.loadtxt(result.output_path, delimiter=",")
        assert table.shape == (2001, 6)

    def test_fig4_sweep(self, runner):
        config = ScenarioConfig.model_validate({
            "scenario": "fig4_eta_sweep",
            "sweep": {"parameter": "tau", "min": 0.5, "max": 1.0, "count": 2},
        })
        result = runner.run(config, write=False)
        assert result.columns[:2] == ["tau", "eta"]
        for row in result.as_dicts():
            assert np.isfinite(row["eta"])
            assert 0.0 <= row["eta_window_error"] < 1e-2 * abs(row["eta"])

    def test_shaking_report(self, runner):
        config = ScenarioConfig.model_validate({"scenario": "shaking_report", "params": {"lambda": 0.05}})
        result = runner.run(config)
        values = {row["quantity"]: row["value"] for row in result.as_dicts()}
        assert values["w_shake"] == pytest.approx(8.9048e-4, abs=1e-7)
        assert values["A_L_1"] ** 2 == pytest.approx(values["w_shake"], rel=1e-12)
        assert "w_shake," in result.output_path.read_text()

    def test_custom_sweep(self, runner):
        config = ScenarioConfig.model_validate({
            "scenario": "custom",
            "sweep": {"parameter": "lambda", "min": 0.01, "max": 0.03, "count": 3},
            "quantities": ["w_shake", "w_sudden"],
        })
        result = runner.run(config, write=False)
        assert result.columns == ["lam", "w_shake", "w_sudden"]
        first, last = result.rows[0], result.rows[-1]
        assert last[1] / first[1] == pytest.approx(9.0, rel=1e-12)
        params = ModelParams(lam=0.01)
        assert first[2] == sudden_w_up(params.rho, params.xi, 1e-12)

    @pytest.mark.slow
    def test_oracle_report(self, runner):
        config = ScenarioConfig.model_validate({"scenario": "oracle_check", "params": {"lambda": 0.0}})
        result = runner.run(config)
        assert result.passed is True
        assert result.exit_code == 0
        assert len(result.extra_files) == 2
        assert all(path.exists() for path in result.extra_files)
        assert result.oracle_trajectory is not None


@pytest.mark.unit
class TestSuddenRouting:
    def test_resonance_uses_strong_coupling(self):
        assert sudden_w_up(10.0, float("inf"), 1e-12) == pytest.approx(0.2125, abs=1e-4)
