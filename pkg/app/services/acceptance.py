"""
Acceptance suite behind the ``check`` subcommand.

Each item reproduces one published property of the model (closed forms,
limits, symmetries, scaling laws, oracle agreement) and reports pass/fail
with the numbers it compared.
"""

import math
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.core.exceptions import SimulationError
from app.schemas.model import ModelParams, NumericsConfig, ProfileKind
from app.services.backreaction_engine import backreaction_engine
from app.services.bogoliubov_engine import bogoliubov_engine
from app.services.fock_oracle import cross_checker, fock_oracle
from app.services.frequency_profile import make_profile, profile_for
from app.services.lamb_shift_engine import lamb_shift_engine
from app.services.sudden_engine import (
    excitation_probability_sudden,
    excitation_strong_coupling,
    excitation_weak_coupling,
    excitation_weak_coupling_series,
    mean_photons_with_atom,
    squeezed_vacuum_amplitudes,
)
from app.services.transient_engine import transient_engine

logger = logging.getLogger(__name__)

ItemCheck = Callable[[], Tuple[bool, str]]


@dataclass(frozen=True)
class AcceptanceItem:
    number: int
    title: str
    passed: Optional[bool]
    detail: str
    seconds: float


@dataclass
class AcceptanceReport:
    items: List[AcceptanceItem] = field(default_factory=list)
    quick: bool = False

    @property
    def all_passed(self) -> bool:
        return all(item.passed is not False for item in self.items)

    @property
    def failures(self) -> List[AcceptanceItem]:
        return [item for item in self.items if item.passed is False]


class AcceptanceSuite:
    """Runs the numbered acceptance items against the engines."""

    def __init__(self, numerics: Optional[NumericsConfig] = None, quick: bool = False):
        self.numerics = numerics or NumericsConfig()
        self.quick = quick
        self.base = ModelParams()
        self.logger = logging.getLogger(__name__)

    def items(self) -> List[Tuple[int, str, ItemCheck, bool]]:
        """(number, title, check, slow) for every item."""
        return [
            (1, "sudden DCE closed form", self.sudden_closed_form, False),
            (2, "symplectic invariant", self.symplectic_invariant, False),
            (3, "rho <-> 1/rho symmetry", self.ratio_symmetry, False),
            (4, "weak-coupling consistency", self.weak_coupling, False),
            (5, "strong-coupling limit", self.strong_coupling, False),
            (6, "squeezed-vacuum normalisation", self.squeezed_norm, False),
            (7, "efficiency F", self.efficiency, False),
            (8, "shaking identity", self.shaking_identity, False),
            (9, "oracle photon parity", self.oracle_parity, True),
            (10, "oracle versus perturbation theory", self.oracle_agreement, True),
            (11, "back-reaction scaling", self.eta_scaling, False),
            (12, "photon-number bookkeeping", self.photon_bookkeeping, False),
            (13, "oracle N conservation", self.n_conservation, True),
        ]

    def run(self, only: Optional[List[int]] = None) -> AcceptanceReport:
        report = AcceptanceReport(quick=self.quick)
        for number, title, check, slow in self.items():
            if only and number not in only:
                continue
            if self.quick and slow:
                report.items.append(AcceptanceItem(number, title, None, "skipped in quick mode", 0.0))
                continue
            start = time.perf_counter()
            try:
                passed, detail = check()
            except SimulationError as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc.message}"
            elapsed = time.perf_counter() - start
            level = logging.INFO if passed else logging.WARNING
            self.logger.log(level, f"[{number:2d}] {title}: {'PASS' if passed else 'FAIL'} ({elapsed:.1f}s) {detail}")
            report.items.append(AcceptanceItem(number, title, bool(passed), detail, elapsed))
        return report

    # Items

    def sudden_closed_form(self) -> Tuple[bool, str]:
        profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1e-3)
        traj = bogoliubov_engine.integrate(profile, self.numerics)
        expected = (5.0 - 0.5) ** 2 / (4 * 0.5 * 5.0)
        rel = abs(traj.n_dce - expected) / expected
        return rel < 0.01, f"|beta_inf|^2 = {traj.n_dce:.6f}, closed form {expected:.6f}"

    def symplectic_invariant(self) -> Tuple[bool, str]:
        drifts = []
        for tau in (1e-3, 0.1, 1.0, 10.0):
            traj = bogoliubov_engine.integrate(profile_for(self.base.with_updates(tau=tau)), self.numerics)
            drifts.append(traj.symplectic_drift)
        return max(drifts) < 1e-9, "drifts " + ", ".join(f"{d:.1e}" for d in drifts)

    def ratio_symmetry(self) -> Tuple[bool, str]:
        tol = self.numerics.series_tol
        worst = 0.0
        for rho in (1.5, 3.0, 10.0, 30.0):
            for xi in (0.05, 0.5, 5.0):
                worst = max(worst, abs(excitation_probability_sudden(rho, xi, tol)
                                       - excitation_probability_sudden(1.0 / rho, xi, tol)))
        return worst < 1e-12, f"max difference {worst:.2e}"

    def weak_coupling(self) -> Tuple[bool, str]:
        tol = self.numerics.series_tol

        def rel(approx, xi):
            exact = excitation_probability_sudden(10.0, xi, tol)
            return abs(approx(10.0, xi) - exact) / exact

        def leading(rho, xi):
            return xi * xi * (rho - 1.0) ** 2 / (4.0 * rho)

        corrected_01 = rel(excitation_weak_coupling_series, 0.1)
        corrected_005 = rel(excitation_weak_coupling_series, 0.05)
        shrink = corrected_01 / corrected_005
        printed_small = rel(excitation_weak_coupling, 1e-3)
        leading_005 = rel(leading, 0.05)
        passed = shrink >= 8.0 and corrected_005 < leading_005 and printed_small < 1e-4
        return passed, (
            f"xi^4 expansion error {corrected_01:.2e} -> {corrected_005:.2e} (x{shrink:.1f}), "
            f"leading-term error {leading_005:.2e}, closed form at xi=1e-3 {printed_small:.1e}"
        )

    def strong_coupling(self) -> Tuple[bool, str]:
        series = excitation_probability_sudden(10.0, 1e2, self.numerics.series_tol)
        limit = excitation_strong_coupling(10.0)
        far = excitation_strong_coupling(1e5)
        passed = abs(series - limit) / limit < 0.02 and abs(far - 0.5) / 0.5 < 0.02
        return passed, f"series {series:.5f} vs limit {limit:.5f}; limit at rho=1e5 {far:.5f}"

    def squeezed_norm(self) -> Tuple[bool, str]:
        deficits = [abs(squeezed_vacuum_amplitudes(rho, self.numerics.series_tol).norm_deficit)
                    for rho in (2.0, 10.0, 100.0)]
        return max(deficits) < 1e-10, "deficits " + ", ".join(f"{d:.1e}" for d in deficits)

    def _efficiency(self, tau: float) -> float:
        params = self.base.with_updates(tau=tau)
        traj = bogoliubov_engine.integrate(profile_for(params), self.numerics, E0=params.E0)
        return transient_engine.excitation_efficiency_F(traj, params.E0)

    def efficiency(self) -> Tuple[bool, str]:
        tau0 = 1e-3 * min(1.0 / self.base.omega2, 1.0 / self.base.E0)
        f0 = self._efficiency(tau0)
        finite = [self._efficiency(tau) for tau in (0.2, 0.5, 1.0, 2.0)]
        grid = np.geomspace(0.1, 10.0, 7 if self.quick else 21)
        f_max = max(self._efficiency(float(tau)) for tau in grid)
        passed = abs(f0 - 1.0) < 1e-3 and min(finite) > 1.0 and f_max > 10.0
        return passed, f"F(0) = {f0:.6f}, F(0.2..2) min {min(finite):.3f}, max F on [0.1, 10] {f_max:.2f}"

    def shaking_identity(self) -> Tuple[bool, str]:
        params = self.base.with_updates(lam=0.05)
        report = lamb_shift_engine.shaking_probability(params)
        direct = params.lam ** 2 * (1.0 / (params.omega2 + params.E0) - 1.0 / (params.omega1 + params.E0)) ** 2
        from_shift = (report.delta_E_L / params.lam) ** 2
        passed = (
            abs(report.w_shake - direct) < 1e-14
            and abs(report.w_shake - from_shift) < 1e-14
            and abs(report.w_shake - 8.905e-4) < 1e-7
        )
        return passed, f"w_shake = {report.w_shake:.6e}, (dE_L/lambda)^2 = {from_shift:.6e}"

    def oracle_parity(self) -> Tuple[bool, str]:
        free = fock_oracle.evolve(self.base.with_updates(lam=0.0), None, self.numerics)
        odd_free = float(np.max(free.odd_weight))
        odd = [float(np.max(fock_oracle.evolve(self.base.with_updates(lam=lam), None, self.numerics).odd_weight))
               for lam in (0.01, 0.02)]
        ratio = odd[1] / odd[0] if odd[0] > 0 else math.inf
        passed = odd_free < 1e-12 and odd[0] > 0 and abs(ratio - 4.0) <= 0.8
        return passed, f"odd weight at lambda=0: {odd_free:.1e}; ratio for doubled lambda {ratio:.3f}"

    def oracle_agreement(self) -> Tuple[bool, str]:
        params = self.base.with_updates(lam=0.01)
        smooth = cross_checker.run(params, self.numerics)
        sudden_cfg = self.numerics.with_updates(fock_max=max(self.numerics.fock_max, 96))
        fast = cross_checker.run(params.with_updates(tau=1e-3), sudden_cfg)
        rows = [row for row in smooth.rows if row.name == "transient_excitation"]
        rows += [row for row in fast.rows if row.name == "sudden_excitation"]
        passed = len(rows) == 2 and all(row.passed for row in rows)
        return passed, "; ".join(
            f"{row.name} {row.value_a:.4e} vs {row.value_b:.4e}" for row in rows
        )

    def _eta_slope(self, lo: float, hi: float) -> float:
        taus = np.geomspace(lo / self.base.E0, hi / self.base.E0, 3 if self.quick else 5)
        etas = [abs(backreaction_engine.eta(self.base.with_updates(tau=float(tau)), self.numerics,
                                            window_check=False).eta) for tau in taus]
        return float(np.polyfit(np.log(taus), np.log(etas), 1)[0])

    def eta_scaling(self) -> Tuple[bool, str]:
        small = self._eta_slope(0.05, 0.2)
        large = self._eta_slope(3.0, 10.0)
        eta_a = backreaction_engine.eta(self.base.with_updates(lam=0.01), self.numerics, window_check=False).eta
        eta_b = backreaction_engine.eta(self.base.with_updates(lam=0.1), self.numerics, window_check=False).eta
        spread = abs(eta_a - eta_b) / abs(eta_a)
        passed = abs(small - 2.0) <= 0.2 and abs(large - 1.0) <= 0.2 and spread < 1e-10
        return passed, f"slopes {small:.3f} (small tau), {large:.3f} (large tau); lambda spread {spread:.1e}"

    def photon_bookkeeping(self) -> Tuple[bool, str]:
        tol = self.numerics.series_tol
        report = mean_photons_with_atom(10.0, 0.05, tol)
        diff = abs(report.direct_sum - report.n_bar)
        return diff < 10 * tol, f"direct sum {report.direct_sum:.12f}, N_dce - w_up {report.n_bar:.12f}"

    def n_conservation(self) -> Tuple[bool, str]:
        lam = 0.5
        params = ModelParams(E0=0.8, omega1=0.8, omega2=0.8, lam=lam, tau=1.0)
        periods = 10 if self.quick else 100
        # resonant one-excitation Rabi period 2 pi / (2 lam)
        t_max = periods * math.pi / lam
        cfg = self.numerics.with_updates(t_min=-1.0, t_max=t_max, rotating_wave=True, fock_max=8)
        traj = fock_oracle.evolve(params, None, cfg, initial=(0, "up"))
        spread = float(np.max(traj.N_expectation) - np.min(traj.N_expectation))
        swing = float(np.max(traj.P_excited) - np.min(traj.P_excited))
        return spread < 1e-8 and swing > 0.5, f"<N> spread {spread:.1e} while P_excited swings {swing:.2f}"


def run_acceptance(numerics: Optional[NumericsConfig] = None, quick: bool = False,
                   only: Optional[List[int]] = None) -> AcceptanceReport:
    return AcceptanceSuite(numerics, quick).run(only)
