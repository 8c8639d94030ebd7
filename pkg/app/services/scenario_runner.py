"""
Scenario orchestration: figure-data reproduction, parameter sweeps and the
oracle comparison report, each written as a CSV file with a metadata header.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import SimulationError
from app.schemas.scenario import AxisSpec, Quantity, ScenarioConfig, ScenarioKind, Spacing, SweepSpec
from app.services.backreaction_engine import backreaction_engine
from app.services.bogoliubov_engine import bogoliubov_engine
from app.services.fock_oracle import OracleTrajectory, cross_checker
from app.services.frequency_profile import profile_for
from app.services.lamb_shift_engine import lamb_shift_engine
from app.services.result_export import ResultExporter, result_exporter
from app.services.sudden_engine import excitation_probability_sudden, excitation_strong_coupling
from app.services.transient_engine import transient_engine

logger = logging.getLogger(__name__)

DEFAULT_SWEEPS = {
    ScenarioKind.FIG2_TRANSIENT_SWEEP: SweepSpec(parameter="tau", min=1e-3, max=10.0, count=31, spacing=Spacing.LOG),
    ScenarioKind.FIG4_ETA_SWEEP: SweepSpec(parameter="tau", min=0.0625, max=12.5, count=25, spacing=Spacing.LOG),
}


@dataclass
class ScenarioResult:
    """Rows produced by a scenario together with the header written above them."""
    scenario: ScenarioKind
    columns: List[str]
    rows: List[List[Any]]
    metadata: Dict[str, Any]
    output_path: Optional[Path] = None
    passed: Optional[bool] = None
    notes: List[str] = field(default_factory=list)
    extra_files: List[Path] = field(default_factory=list)
    oracle_trajectory: Optional[OracleTrajectory] = None

    @property
    def exit_code(self) -> int:
        return 3 if self.passed is False else 0

    def as_dicts(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def sudden_w_up(rho: float, xi: float, series_tol: float) -> float:
    """Sudden excitation probability, routed to the strong-coupling limit at exact resonance."""
    if np.isinf(xi):
        return excitation_strong_coupling(rho)
    return excitation_probability_sudden(rho, xi, series_tol)


class ScenarioRunner:
    """Runs ScenarioConfig objects; sweep points fan out over a thread pool."""

    def __init__(self, workers: Optional[int] = None, exporter: Optional[ResultExporter] = None):
        self.workers = workers or settings.SWEEP_WORKERS
        self.executor = ThreadPoolExecutor(max_workers=self.workers)
        self.exporter = exporter or result_exporter
        self.logger = logging.getLogger(__name__)
        self._handlers: Dict[ScenarioKind, Callable[[ScenarioConfig], ScenarioResult]] = {
            ScenarioKind.FIG1_SUDDEN_GRID: self._fig1,
            ScenarioKind.FIG2_TRANSIENT_SWEEP: self._fig2,
            ScenarioKind.FIG3_BETA_TRACE: self._fig3,
            ScenarioKind.FIG4_ETA_SWEEP: self._fig4,
            ScenarioKind.SHAKING_REPORT: self._shaking,
            ScenarioKind.ORACLE_CHECK: self._oracle,
            ScenarioKind.CUSTOM: self._custom,
        }

    def run(self, config: ScenarioConfig, write: bool = True) -> ScenarioResult:
        """
        Run one scenario and optionally write its CSV.

        Args:
            config: Validated scenario configuration
            write: Write the CSV (and any companion files)

        Returns:
            ScenarioResult; ``exit_code`` is 3 when an oracle comparison failed

        Raises:
            SimulationError: engine errors, with the scenario name prefixed
        """
        self.logger.info(f"Running scenario {config.scenario.value}")
        try:
            result = self._handlers[config.scenario](config)
        except SimulationError as exc:
            raise exc.with_context(f"scenario {config.scenario.value}")

        if write:
            target = self.exporter.resolve_path(config.output_path, f"{config.scenario.value}.csv")
            if result.rows and all(isinstance(v, (int, float, np.floating)) for v in result.rows[0]):
                self.exporter.write_table(target, result.columns, np.asarray(result.rows, dtype=float), result.metadata)
            else:
                self.exporter.write_records(target, result.columns, result.rows, result.metadata)
            result.output_path = target
            self._write_companions(result, target)
        return result

    def sweep(self, values: Sequence[float], point: Callable[[float], List[Any]],
              describe: Callable[[float], str]) -> List[List[Any]]:
        """Evaluate ``point`` at every value; rows come back in input order."""

        def guarded(value: float) -> List[Any]:
            try:
                return point(value)
            except SimulationError as exc:
                raise exc.with_context(describe(value))

        return list(self.executor.map(guarded, values))

    # Scenario handlers

    def _fig1(self, config: ScenarioConfig) -> ScenarioResult:
        tol = config.numerics.series_tol
        xis = config.grid_xi.values()

        def row_block(rho: float) -> List[List[float]]:
            return [[float(rho), float(xi), sudden_w_up(rho, xi, tol)] for xi in xis]

        blocks = self.sweep(config.rho_values(), row_block, lambda rho: f"rho={rho:g}")
        rows = [row for block in blocks for row in block]
        metadata = self.exporter.build_metadata(
            config.scenario.value, config.params, config.numerics,
            window="not used (closed-form sums)",
            grid_rho=config.grid_rho.model_dump(mode="json"),
            grid_xi=config.grid_xi.model_dump(mode="json"),
        )
        return ScenarioResult(config.scenario, ["rho", "xi", "w_up"], rows, metadata)

    def _tau_sweep(self, config: ScenarioConfig) -> SweepSpec:
        return config.sweep or DEFAULT_SWEEPS[config.scenario]

    def _fig2(self, config: ScenarioConfig) -> ScenarioResult:
        sweep = self._tau_sweep(config)

        def point(tau: float) -> List[float]:
            params = config.params.with_updates(tau=float(tau))
            profile = profile_for(params, config.profile_table)
            traj = bogoliubov_engine.integrate(profile, config.numerics, E0=params.E0)
            result = transient_engine.excitation_probability_transient(traj, params)
            return [float(tau), result.F, result.w_up, result.N_dce, result.F_tail_error]

        rows = self.sweep(sweep.values(), point, lambda tau: f"tau={tau:g}")
        metadata = self._sweep_metadata(config, sweep)
        return ScenarioResult(config.scenario, ["tau", "F", "w_up", "N_dce", "F_tail_error"], rows, metadata)

    def _fig3(self, config: ScenarioConfig) -> ScenarioResult:
        params = config.params
        profile = profile_for(params, config.profile_table)
        traj = bogoliubov_engine.integrate(profile, config.numerics)
        columns, data = self.exporter.trajectory_table(traj.times, traj.alpha, traj.beta)
        photons = traj.photon_number
        peak = int(np.argmax(photons))
        summary = {
            "n_dce": traj.n_dce,
            "max_beta_abs2": float(photons[peak]),
            "t_at_max": float(traj.times[peak]),
            "max_over_final": float(photons[peak] / traj.n_dce) if traj.n_dce > 0 else float("nan"),
            "symplectic_drift": traj.symplectic_drift,
        }
        metadata = self.exporter.build_metadata(
            config.scenario.value, params, config.numerics,
            window=f"[{traj.window[0]:.12g}, {traj.window[1]:.12g}]",
            summary=summary,
        )
        result = ScenarioResult(config.scenario, columns, data.tolist(), metadata)
        result.notes.append(
            f"max |beta|^2 = {summary['max_beta_abs2']:.6g} at t = {summary['t_at_max']:.4g}, "
            f"final {summary['n_dce']:.6g}"
        )
        return result

    def _fig4(self, config: ScenarioConfig) -> ScenarioResult:
        sweep = self._tau_sweep(config)

        def point(tau: float) -> List[float]:
            params = config.params.with_updates(tau=float(tau))
            profile = profile_for(params, config.profile_table)
            result = backreaction_engine.eta(params, config.numerics, profile)
            window_error = result.eta_window_error if result.eta_window_error is not None else float("nan")
            return [float(tau), result.eta, result.delta_N_inf, result.N_dce, result.combined_correction, window_error]

        rows = self.sweep(sweep.values(), point, lambda tau: f"tau={tau:g}")
        metadata = self._sweep_metadata(config, sweep)
        columns = ["tau", "eta", "delta_N_inf", "N_dce", "combined_correction", "eta_window_error"]
        return ScenarioResult(config.scenario, columns, rows, metadata)

    def _shaking(self, config: ScenarioConfig) -> ScenarioResult:
        params = config.params
        report = lamb_shift_engine.shaking_probability(params)
        A_L, _ = lamb_shift_engine.amplitude_split(1, params)
        records = [
            ["E_L_initial", report.E_L_initial],
            ["E_L_final", report.E_L_final],
            ["delta_E_L", report.delta_E_L],
            ["w_shake", report.w_shake],
            ["lambda", report.lam],
            ["A_L_1", float(A_L.real)],
            ["tau_E0", params.tau * params.E0],
        ]
        metadata = self.exporter.build_metadata(config.scenario.value, params, config.numerics,
                                                window="not used (instantaneous switch)")
        return ScenarioResult(config.scenario, ["quantity", "value"], records, metadata)

    def _oracle(self, config: ScenarioConfig) -> ScenarioResult:
        params = config.params
        profile = profile_for(params, config.profile_table)
        report = cross_checker.run(params, config.numerics, profile)
        records = [
            [row.name, row.value_a, row.value_b, row.abs_diff, row.tolerance, row.passed, row.note]
            for row in report.rows
        ]
        metadata = self.exporter.build_metadata(config.scenario.value, params, config.numerics,
                                                oracle_hamiltonian="rotating-wave", notes=report.notes)
        result = ScenarioResult(
            config.scenario,
            ["name", "value_a", "value_b", "abs_diff", "tolerance", "passed", "note"],
            records,
            metadata,
            passed=report.all_passed,
            notes=list(report.notes),
            oracle_trajectory=report.trajectory,
        )
        if not report.all_passed:
            self.logger.warning(f"Oracle comparison failed: {[row.name for row in report.rows if not row.passed]}")
        return result

    def _custom(self, config: ScenarioConfig) -> ScenarioResult:
        sweep = config.sweep
        quantities = list(config.quantities)
        needs_traj = any(q in (Quantity.N_DCE, Quantity.F, Quantity.W_UP) for q in quantities)

        def point(value: float) -> List[float]:
            params = config.params.with_updates(**{sweep.parameter: float(value)})
            profile = profile_for(params, config.profile_table)
            traj = bogoliubov_engine.integrate(profile, config.numerics, E0=params.E0) if needs_traj else None
            transient = None
            row = [float(value)]
            for quantity in quantities:
                if quantity == Quantity.N_DCE:
                    row.append(traj.n_dce)
                elif quantity in (Quantity.F, Quantity.W_UP):
                    transient = transient or transient_engine.excitation_probability_transient(traj, params)
                    row.append(transient.F if quantity == Quantity.F else transient.w_up)
                elif quantity == Quantity.ETA:
                    row.append(backreaction_engine.eta(params, config.numerics, profile, window_check=False).eta)
                elif quantity == Quantity.W_SHAKE:
                    row.append(lamb_shift_engine.shaking_probability(params).w_shake)
                else:
                    row.append(sudden_w_up(params.rho, params.xi, config.numerics.series_tol))
            return row

        rows = self.sweep(sweep.values(), point, lambda v: f"{sweep.parameter}={v:g}")
        metadata = self._sweep_metadata(config, sweep, quantities=[q.value for q in quantities])
        return ScenarioResult(config.scenario, [sweep.parameter] + [q.value for q in quantities], rows, metadata)

    def _sweep_metadata(self, config: ScenarioConfig, sweep: AxisSpec, **extra: Any) -> Dict[str, Any]:
        return self.exporter.build_metadata(
            config.scenario.value, config.params, config.numerics,
            window=self.exporter.describe_window(config.numerics),
            sweep=sweep.model_dump(mode="json"),
            **extra,
        )

    def _write_companions(self, result: ScenarioResult, target: Path) -> None:
        trajectory = result.oracle_trajectory
        if trajectory is None:
            return
        (columns, data), (dist_columns, distribution) = self.exporter.oracle_tables(trajectory)
        stem = target.with_suffix("")
        result.extra_files.append(
            self.exporter.write_table(f"{stem}_trajectory.csv", columns, data, result.metadata)
        )
        result.extra_files.append(
            self.exporter.write_table(f"{stem}_distribution.csv", dist_columns, distribution, result.metadata)
        )


scenario_runner = ScenarioRunner()


def run_scenario(config: ScenarioConfig, write: bool = True) -> ScenarioResult:
    return scenario_runner.run(config, write)
