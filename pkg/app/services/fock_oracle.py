"""
Exact unitary evolution of the atom + mode Hamiltonian in a truncated Fock basis.

Basis index 2n + s, s = 0 for the atomic ground state and s = 1 for the
excited state. Steps use the fourth-order Magnus propagator
Omega = -i h/2 (H1 + H2) + (sqrt(3) h^2 / 12) [H1, H2] with Gauss nodes
1/2 -+ sqrt(3)/6; exp(Omega) is unitary because Omega is anti-Hermitian.
"""

import math
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, expm

from app.core.exceptions import BaselineUndefinedError, InputValidationError, NormDriftError, ResonanceError
from app.schemas.model import ModelParams, NumericsConfig, ProfileKind
from app.services.backreaction_engine import backreaction_engine, tail_average
from app.services.bogoliubov_engine import bogoliubov_engine
from app.services.frequency_profile import FrequencyProfile, profile_for, profile_window
from app.services.sudden_engine import excitation_probability_sudden, excitation_strong_coupling, excited_dressed_state
from app.services.transient_engine import transient_engine

logger = logging.getLogger(__name__)

SPIN_INDEX = {"down": 0, "up": 1}
GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class FockOperators:
    """Dense operators on the truncated basis."""
    fock_max: int
    a: np.ndarray
    number: np.ndarray
    p_up: np.ndarray
    squeeze: np.ndarray
    coupling_full: np.ndarray
    coupling_rwa: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * (self.fock_max + 1)


@lru_cache(maxsize=16)
def fock_operators(fock_max: int) -> FockOperators:
    if fock_max < 2:
        raise InputValidationError("fock_max must be at least 2")
    identity2 = np.eye(2)
    identity_f = np.eye(fock_max + 1)
    a_f = np.diag(np.sqrt(np.arange(1, fock_max + 1, dtype=float)), k=1)
    sigma_minus = np.array([[0.0, 1.0], [0.0, 0.0]])

    a = np.kron(a_f, identity2)
    a_dag = a.T
    sm = np.kron(identity_f, sigma_minus)
    sp = sm.T
    return FockOperators(
        fock_max=fock_max,
        a=a,
        number=np.kron(np.diag(np.arange(fock_max + 1, dtype=float)), identity2),
        p_up=np.kron(identity_f, np.diag([0.0, 1.0])),
        squeeze=a @ a - a_dag @ a_dag,
        coupling_full=(sp + sm) @ (a + a_dag),
        coupling_rwa=sp @ a + sm @ a_dag,
    )


def build_hamiltonian(
    params: ModelParams,
    profile: FrequencyProfile,
    t: float,
    N_max: int,
    rotating_wave: bool = False,
) -> np.ndarray:
    """
    H = E0 (1 + sigma3)/2 + omega a^dag a + i (omega_dot / 4 omega)(a^2 - a^dag^2) + lambda V.

    V is (sigma+ + sigma-)(a + a^dag), or sigma+ a + sigma- a^dag with ``rotating_wave``.
    """
    ops = fock_operators(N_max)
    omega, omega_dot = profile.evaluate(t)
    return _hamiltonian(ops, params.E0, params.lam, omega, omega_dot, rotating_wave)


def _hamiltonian(ops: FockOperators, E0: float, lam: float, omega: float, omega_dot: float,
                 rotating_wave: bool) -> np.ndarray:
    coupling = ops.coupling_rwa if rotating_wave else ops.coupling_full
    H = (E0 * ops.p_up + omega * ops.number + lam * coupling).astype(complex)
    if omega_dot != 0.0:
        H += 1j * (omega_dot / (4.0 * omega)) * ops.squeeze
    return H


@dataclass(frozen=True)
class ObservableRecord:
    """Observables of the evolved state at one sample time."""
    time: float
    P_excited: float
    mean_photons: float
    photon_distribution: np.ndarray
    even_parity_weight: float
    odd_parity_weight: float
    N_expectation: float
    squeeze_moment: float


@dataclass(frozen=True)
class OracleTrajectory:
    """Sampled observables of an exact evolution and its asymptotic summaries."""
    times: np.ndarray
    P_excited: np.ndarray
    mean_photons: np.ndarray
    photon_distribution: np.ndarray
    even_weight: np.ndarray
    odd_weight: np.ndarray
    N_expectation: np.ndarray
    squeeze_moment: np.ndarray
    final_state: np.ndarray
    norm_drift: float
    top_population: float
    truncation_safe: bool
    w_up_bare: float
    w_up_dressed: float
    n_bar: float
    N_inf: float
    rotating_wave: bool
    fock_max: int
    warnings: List[str] = field(default_factory=list)

    def record(self, index: int) -> ObservableRecord:
        return ObservableRecord(
            time=float(self.times[index]),
            P_excited=float(self.P_excited[index]),
            mean_photons=float(self.mean_photons[index]),
            photon_distribution=self.photon_distribution[index],
            even_parity_weight=float(self.even_weight[index]),
            odd_parity_weight=float(self.odd_weight[index]),
            N_expectation=float(self.N_expectation[index]),
            squeeze_moment=float(self.squeeze_moment[index]),
        )


class FockOracle:
    """Brute-force propagation of the full Hamiltonian, used to validate the analytic engines."""

    CORE_STEPS_PER_TAU = 50
    CORE_PHASE_STEP = 0.05

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def _step_size(self, profile: FrequencyProfile, params: ModelParams, cfg: NumericsConfig,
                   t: float, t_end: float) -> float:
        """Step from ``t`` (not past ``t_end``) fine enough for the part of the switch it covers."""
        omega_max = max(profile.omega1, profile.omega2, params.E0)
        h = min(cfg.oracle_max_step, t_end - t)
        if profile.kind == ProfileKind.SMOOTH:
            h_core = min(profile.tau / self.CORE_STEPS_PER_TAU, self.CORE_PHASE_STEP / omega_max)
            for _ in range(64):
                # the point of [t, t + h] closest to the switch centre sets the step
                nearest = 0.0 if t < 0.0 < t + h else min(abs(t), abs(t + h))
                allowed = h_core * math.exp(min(nearest / (4.0 * profile.tau), 50.0))
                if allowed >= h:
                    break
                h = allowed
        elif profile.kind == ProfileKind.CUSTOM:
            t0, t1 = profile.table_t[0], profile.table_t[-1]
            spacing = float(np.min(np.diff(profile.table_t)))
            h_core = min(spacing / 4.0, self.CORE_PHASE_STEP / omega_max)
            if t < t0:
                h = min(h, max(t0 - t, h_core))
            elif t < t1:
                h = min(h, h_core)
        return h

    def _march(self, state, t_a, t_b, ops, params, profile, cfg, cache):
        t = t_a
        while t_b - t > 1e-14 * max(1.0, abs(t_b)):
            hh = self._step_size(profile, params, cfg, t, t_b)
            t1 = t + (0.5 - GAUSS_OFFSET) * hh
            t2 = t + (0.5 + GAUSS_OFFSET) * hh
            w1, wd1 = profile.evaluate(t1)
            w2, wd2 = profile.evaluate(t2)
            if w1 == w2 and wd1 == 0.0 and wd2 == 0.0:
                key = (round(hh, 12), w1)
                U = cache.get(key)
                if U is None:
                    if len(cache) > 64:
                        cache.clear()
                    H = _hamiltonian(ops, params.E0, params.lam, w1, 0.0, cfg.rotating_wave)
                    U = expm(-1j * hh * H)
                    cache[key] = U
            else:
                H1 = _hamiltonian(ops, params.E0, params.lam, w1, wd1, cfg.rotating_wave)
                H2 = _hamiltonian(ops, params.E0, params.lam, w2, wd2, cfg.rotating_wave)
                Omega = -0.5j * hh * (H1 + H2) + (math.sqrt(3.0) * hh * hh / 12.0) * (H1 @ H2 - H2 @ H1)
                U = expm(Omega)
            state = U @ state
            t += hh
        return state

    def evolve(
        self,
        params: ModelParams,
        profile: Optional[FrequencyProfile],
        cfg: NumericsConfig,
        initial: Tuple[int, str] = (0, "down"),
    ) -> OracleTrajectory:
        """
        Evolve a bare initial state (default |0,down>) across the window.

        Args:
            params: Model parameters
            profile: Frequency profile (defaults to the one implied by ``params``)
            cfg: Numerical controls; ``fock_max`` and ``rotating_wave`` select the model
            initial: Bare initial state (photon number, "down" | "up")

        Returns:
            OracleTrajectory sampled on the same grid as the Bogoliubov engine

        Raises:
            NormDriftError: if the norm drifts by more than ``cfg.norm_tol``
        """
        profile = profile or profile_for(params)
        ops = fock_operators(cfg.fock_max)
        n0, spin = initial
        if not 0 <= n0 <= cfg.fock_max or spin not in SPIN_INDEX:
            raise InputValidationError(f"invalid initial state {initial!r} for fock_max={cfg.fock_max}")

        t_min, t_max = profile_window(profile, cfg)
        profile.check_window(t_min, t_max, cfg.asymptote_tol)
        times = np.linspace(t_min, t_max, cfg.sample_count)

        state = np.zeros(ops.dim, dtype=complex)
        state[2 * n0 + SPIN_INDEX[spin]] = 1.0
        quench = None
        if profile.kind == ProfileKind.SUDDEN and profile.omega1 != profile.omega2:
            theta = 0.5 * math.log(profile.omega2 / profile.omega1)
            quench = expm(0.5 * theta * ops.squeeze)

        cache: Dict = {}
        states = np.empty((len(times), ops.dim), dtype=complex)
        states[0] = state
        for k in range(len(times) - 1):
            t_a, t_b = times[k], times[k + 1]
            if quench is not None and t_a < 0.0 <= t_b:
                state = self._march(state, t_a, 0.0, ops, params, profile, cfg, cache)
                state = quench @ state
                state = self._march(state, 0.0, t_b, ops, params, profile, cfg, cache)
            else:
                state = self._march(state, t_a, t_b, ops, params, profile, cfg, cache)
            states[k + 1] = state

        return self._observe(times, states, params, profile, cfg, ops)

    def _observe(self, times, states, params, profile, cfg, ops) -> OracleTrajectory:
        probs = np.abs(states) ** 2
        norms = probs.sum(axis=1)
        norm_drift = float(np.max(np.abs(norms - 1.0)))
        if norm_drift > cfg.norm_tol:
            raise NormDriftError(
                f"oracle norm drift {norm_drift:.3e} exceeds {cfg.norm_tol:g}",
                {"norm_drift": norm_drift},
            )

        dist = probs.reshape(len(times), cfg.fock_max + 1, 2).sum(axis=2)
        n = np.arange(cfg.fock_max + 1)
        p_excited = probs[:, 1::2].sum(axis=1)
        mean_photons = dist @ n
        even = dist[:, 0::2].sum(axis=1)
        odd = dist[:, 1::2].sum(axis=1)
        a2 = ops.a @ ops.a
        moment = 2.0 * np.real(np.einsum("ti,ij,tj->t", states.conj(), a2, states))

        top = float(np.max(dist[:, -2:].sum(axis=1)))
        warnings: List[str] = []
        safe = top <= cfg.truncation_tol
        if not safe:
            message = f"top two Fock levels reach population {top:.3e} > {cfg.truncation_tol:g}; raise fock_max"
            warnings.append(message)
            self.logger.warning(message)

        delta2 = params.E0 - profile.omega2
        period = 2.0 * math.pi / abs(delta2) if delta2 != 0.0 else None
        final = states[-1]
        return OracleTrajectory(
            times=times,
            P_excited=p_excited,
            mean_photons=mean_photons,
            photon_distribution=dist,
            even_weight=even,
            odd_weight=odd,
            N_expectation=mean_photons + p_excited,
            squeeze_moment=moment,
            final_state=final,
            norm_drift=norm_drift,
            top_population=top,
            truncation_safe=safe,
            w_up_bare=tail_average(times, p_excited, period),
            w_up_dressed=self.excited_projection(final, params, profile.omega2, cfg),
            n_bar=tail_average(times, mean_photons, period),
            N_inf=tail_average(times, mean_photons + p_excited, period),
            rotating_wave=cfg.rotating_wave,
            fock_max=cfg.fock_max,
            warnings=warnings,
        )

    def excited_projection(self, state: np.ndarray, params: ModelParams, omega: float, cfg: NumericsConfig) -> float:
        """
        Weight of ``state`` on the excited dressed states of the static Hamiltonian at ``omega``.

        Rotating-wave: the 2x2 dressed pairs (|n,down>, |n-1,up>). Full model:
        eigenvectors of H with more than half their weight on the excited atom.
        """
        N = cfg.fock_max
        if cfg.rotating_wave:
            delta = params.E0 - omega
            if params.lam == 0.0:
                return float(np.sum(np.abs(state[1::2]) ** 2))
            total = abs(state[2 * N + 1]) ** 2
            for n in range(1, N + 1):
                c_down, c_up = excited_dressed_state(n, delta, params.lam)
                total += abs(c_down * state[2 * n] + c_up * state[2 * (n - 1) + 1]) ** 2
            return float(total)

        ops = fock_operators(N)
        H = _hamiltonian(ops, params.E0, params.lam, omega, 0.0, False)
        _, vectors = eigh(H)
        up_weight = np.sum(np.abs(vectors[1::2, :]) ** 2, axis=0)
        overlaps = np.abs(vectors.conj().T @ state) ** 2
        return float(np.sum(overlaps[up_weight > 0.5]))


@dataclass(frozen=True)
class ComparisonRow:
    """One oracle-versus-analytic comparison."""
    name: str
    value_a: float
    value_b: float
    abs_diff: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class CrossCheckReport:
    params: ModelParams
    rows: List[ComparisonRow]
    notes: List[str] = field(default_factory=list)
    trajectory: Optional[OracleTrajectory] = None

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _row(name: str, a: float, b: float, tolerance: float, note: str = "", diff: Optional[float] = None) -> ComparisonRow:
    diff = abs(a - b) if diff is None else diff
    return ComparisonRow(name=name, value_a=float(a), value_b=float(b), abs_diff=float(diff),
                         tolerance=float(tolerance), passed=bool(diff <= tolerance), note=note)


class OracleCrossChecker:
    """Compares the exact evolution against the Bogoliubov, transient, sudden and back-reaction engines."""

    PERTURBATIVE_RATIO = 0.05
    SUDDEN_SCALE = 1e-2
    RELATIVE_W = 0.01
    RELATIVE_DELTA_N = 0.05
    FREE_FIELD_TOL = 1e-6

    def __init__(self, oracle: FockOracle):
        self.oracle = oracle
        self.logger = logging.getLogger(__name__)

    def run(self, params: ModelParams, cfg: NumericsConfig,
            profile: Optional[FrequencyProfile] = None) -> CrossCheckReport:
        """
        Evolve with and without the atom and compare with the analytic engines.

        The oracle runs with the rotating-wave coupling here, the Hamiltonian the
        perturbative results are derived for.

        Rows:
            free_field_photons: oracle <a^dag a>(t) at lambda = 0 vs |beta(t)|^2 (max deviation)
            transient_excitation: dressed excited population vs (lambda/Delta2)^2 N_dce F
            photon_backreaction: <N>_inf(lambda) - <N>_inf(0) vs tail-averaged delta_N
            sudden_excitation: dressed excited population vs the sudden series (near-sudden switches only)
        """
        profile = profile or profile_for(params)
        rwa_cfg = cfg.with_updates(rotating_wave=True)
        notes: List[str] = []
        ratio = params.lam / params.E0
        if ratio > self.PERTURBATIVE_RATIO:
            notes.append(f"lambda / E0 = {ratio:.3g} exceeds {self.PERTURBATIVE_RATIO}; perturbative rows are indicative only")

        run = self.oracle.evolve(params, profile, rwa_cfg)
        bare = self.oracle.evolve(params.with_updates(lam=0.0), profile, rwa_cfg)
        notes.extend(run.warnings)
        traj = bogoliubov_engine.integrate(profile, rwa_cfg, E0=params.E0)

        rows = [
            _row("free_field_photons", bare.n_bar, traj.n_dce, self.FREE_FIELD_TOL,
                 note="max deviation over the window",
                 diff=float(np.max(np.abs(bare.mean_photons - traj.photon_number)))),
        ]

        try:
            transient = transient_engine.excitation_probability_transient(traj, params)
            rows.append(_row("transient_excitation", run.w_up_dressed, transient.w_up,
                             self.RELATIVE_W * transient.w_up + 1e-12))
        except (BaselineUndefinedError, ResonanceError) as exc:
            notes.append(f"transient_excitation skipped: {exc.message}")

        delta_n = backreaction_engine.delta_N_asymptote(traj, params.E0, params.lam)
        rows.append(_row("photon_backreaction", run.N_inf - bare.N_inf, delta_n,
                         self.RELATIVE_DELTA_N * abs(delta_n) + 1e-9))

        near_sudden = profile.kind == ProfileKind.SUDDEN or (
            profile.kind == ProfileKind.SMOOTH
            and profile.tau * max(profile.omega2, params.E0) < self.SUDDEN_SCALE
        )
        if near_sudden:
            rho = profile.omega2 / profile.omega1
            if params.Delta2 == 0.0:
                w_sudden = excitation_strong_coupling(rho) if params.lam > 0 else 0.0
            else:
                w_sudden = excitation_probability_sudden(rho, params.lam / params.Delta2, rwa_cfg.series_tol)
            rows.append(_row("sudden_excitation", run.w_up_dressed, w_sudden,
                             self.RELATIVE_W * w_sudden + 1e-12))

        report = CrossCheckReport(params=params, rows=rows, notes=notes, trajectory=run)
        for row in rows:
            level = logging.INFO if row.passed else logging.WARNING
            self.logger.log(level, f"{row.name}: {row.value_a:.6e} vs {row.value_b:.6e} "
                                   f"(diff {row.abs_diff:.2e}, tol {row.tolerance:.2e})")
        return report


fock_oracle = FockOracle()
cross_checker = OracleCrossChecker(fock_oracle)


def evolve(params: ModelParams, profile: Optional[FrequencyProfile], cfg: NumericsConfig,
           initial: Tuple[int, str] = (0, "down")) -> OracleTrajectory:
    return fock_oracle.evolve(params, profile, cfg, initial)


def oracle_cross_checks(params: ModelParams, cfg: NumericsConfig) -> CrossCheckReport:
    return cross_checker.run(params, cfg)
