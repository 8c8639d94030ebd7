import math
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from app.core.exceptions import IntegratorFailureError, WindowTooShortError
from app.schemas.model import NumericsConfig, ProfileKind
from app.services.frequency_profile import FrequencyProfile, profile_window

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DrivenChannels:
    """
    Running integrals driven by the Bogoliubov solution at atomic frequency E0.

    ``B`` is the first-order amplitude integral of beta e^{i E0 t}, ``inner``
    the integral of B alpha* e^{-i E0 t}, ``K`` the integral of
    e^{i E0 t} (i (omega2 - omega) beta - (omega_dot / 2 omega) alpha*).
    """
    E0: float
    B: np.ndarray
    inner: np.ndarray
    K: np.ndarray


@dataclass(frozen=True)
class BogoliubovTrajectory:
    """Sampled Bogoliubov coefficients and their asymptotic constants."""
    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    alpha_inf: complex
    beta_inf: complex
    profile: FrequencyProfile
    window: Tuple[float, float]
    symplectic_drift: float
    cfg: NumericsConfig
    channels: Optional[DrivenChannels] = None
    n_steps: int = 0

    @property
    def photon_number(self) -> np.ndarray:
        """Instantaneous |beta(t)|^2."""
        return np.abs(self.beta) ** 2

    @property
    def n_dce(self) -> float:
        return dce_photon_number(self.beta_inf)


class BogoliubovEngine:
    """Integrates the Bogoliubov equations of a mode with time-dependent frequency."""

    METHOD = "DOP853"
    TAIL_FRACTION = 0.1
    # tau * omega below which the switch is effectively instantaneous
    FAST_SWITCH = 1e-2
    FAST_SWITCH_TOL = 0.05

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def integrate(
        self,
        profile: FrequencyProfile,
        cfg: NumericsConfig,
        E0: Optional[float] = None,
    ) -> BogoliubovTrajectory:
        """
        Integrate alpha, beta over the window and extract their asymptotics.

        The integration runs in demodulated variables a = alpha e^{i Phi},
        b = beta e^{i Phi}, so the step size is set by the switch, not by 1/omega.
        When ``E0`` is given the driven channels (B, inner integral, K) are
        carried in the same adaptive integration.

        Args:
            profile: Mode-frequency profile
            cfg: Numerical controls
            E0: Atomic frequency for the driven channels (optional)

        Returns:
            BogoliubovTrajectory sampled on ``cfg.sample_count`` points
        """
        t_min, t_max = profile_window(profile, cfg)
        profile.check_window(t_min, t_max, cfg.asymptote_tol)
        times = np.linspace(t_min, t_max, cfg.sample_count)

        if profile.kind == ProfileKind.SUDDEN:
            alpha, beta, channels = self._sudden_solution(profile, times, E0)
            n_steps = 0
        else:
            alpha, beta, channels, n_steps = self._solve(profile, cfg, times, E0)

        drift = float(np.max(np.abs(np.abs(alpha) ** 2 - np.abs(beta) ** 2 - 1.0)))
        if drift > 1e-9:
            self.logger.warning(f"Symplectic drift {drift:.2e} exceeds 1e-9; tighten ode tolerances")

        traj = BogoliubovTrajectory(
            times=times,
            alpha=alpha,
            beta=beta,
            alpha_inf=complex(alpha[-1] * np.exp(1j * profile.omega2 * t_max)),
            beta_inf=complex(beta[-1] * np.exp(1j * profile.omega2 * t_max)),
            profile=profile,
            window=(t_min, t_max),
            symplectic_drift=drift,
            cfg=cfg,
            channels=channels,
            n_steps=n_steps,
        )
        self.check_tail(traj)
        self.check_switch_resolved(traj)
        self.logger.debug(
            f"Bogoliubov integration on [{t_min:.3g}, {t_max:.3g}]: {n_steps} steps, "
            f"|beta_inf|^2={traj.n_dce:.6e}, drift={drift:.1e}"
        )
        return traj

    def _solve(self, profile, cfg, times, E0):
        omega2 = profile.omega2
        t0 = times[0]

        def rhs(t, y):
            omega, omega_dot = profile.evaluate(t)
            phi = profile.phase(t)
            a, b = y[0], y[1]
            g = (omega_dot / (2.0 * omega)) * np.exp(2j * phi)
            da = -g * np.conj(b)
            db = -g * np.conj(a)
            if E0 is None:
                return np.array([da, db])
            alpha = a * np.exp(-1j * phi)
            beta = b * np.exp(-1j * phi)
            rot = np.exp(1j * E0 * t)
            dB = beta * rot
            dI = y[2] * np.conj(alpha) / rot
            dK = rot * (1j * (omega2 - omega) * beta - (omega_dot / (2.0 * omega)) * np.conj(alpha))
            return np.array([da, db, dB, dI, dK])

        # alpha(t_min) e^{i omega1 t_min} = 1, beta(t_min) = 0
        a0 = np.exp(1j * (profile.phase(t0) - profile.omega1 * t0))
        y0 = np.array([a0, 0.0 + 0.0j] if E0 is None else [a0, 0.0, 0.0, 0.0, 0.0], dtype=complex)

        y = np.empty((len(y0), len(times)), dtype=complex)
        nfev = 0
        for start, end, max_step in self.segments(profile, times[0], times[-1]):
            last = end == times[-1]
            mask = (times >= start) & ((times <= end) if last else (times < end))
            seg_times = times[mask]
            t_eval = seg_times if seg_times.size and seg_times[-1] == end else np.append(seg_times, end)
            sol = solve_ivp(
                rhs,
                (start, end),
                y0,
                method=self.METHOD,
                t_eval=t_eval,
                rtol=cfg.ode_rel_tol,
                atol=cfg.ode_abs_tol,
                max_step=max_step,
            )
            nfev += int(sol.nfev)
            if not sol.success:
                raise IntegratorFailureError(
                    f"Bogoliubov integration failed on [{start:.4g}, {end:.4g}]: "
                    f"{sol.message} after {nfev} evaluations",
                    {"nfev": nfev, "message": sol.message, "segment": (start, end)},
                )
            y[:, mask] = sol.y[:, :seg_times.size]
            y0 = sol.y[:, -1]

        phase = np.exp(-1j * profile.phase(times))
        alpha = y[0] * phase
        beta = y[1] * phase
        channels = None
        if E0 is not None:
            channels = DrivenChannels(E0=float(E0), B=y[2], inner=y[3], K=y[4])
        return alpha, beta, channels, nfev

    @staticmethod
    def segments(profile: FrequencyProfile, t_min: float, t_max: float) -> List[Tuple[float, float, float]]:
        """
        Split the window at the switch so the adaptive step cannot jump over it.

        Outside the switch the right-hand side is exponentially small and the
        step is free to grow; inside it is capped by the profile's resolution.

        Returns:
            (start, end, max_step) triples covering [t_min, t_max] in order
        """
        interval = profile.switch_interval()
        if interval is None:
            return [(t_min, t_max, np.inf)]
        lo, hi, core_step = interval
        lo, hi = max(lo, t_min), min(hi, t_max)
        if lo >= hi:
            return [(t_min, t_max, np.inf)]
        bounds = [(t_min, lo, np.inf), (lo, hi, core_step), (hi, t_max, np.inf)]
        return [(a, b, step) for a, b, step in bounds if b > a]

    def _sudden_solution(self, profile, times, E0):
        """Analytic jump alpha -> alpha cosh - beta* sinh, beta -> beta cosh - alpha* sinh at t = 0."""
        theta = 0.5 * math.log(profile.omega2 / profile.omega1)
        alpha_plus = math.cosh(theta)
        beta_plus = -math.sinh(theta)
        before = times < 0.0
        alpha = np.where(before, np.exp(-1j * profile.omega1 * times), alpha_plus * np.exp(-1j * profile.omega2 * times))
        beta = np.where(before, 0.0j, beta_plus * np.exp(-1j * profile.omega2 * times))
        if E0 is None:
            return alpha, beta, None

        delta2 = E0 - profile.omega2
        t_pos = np.where(before, 0.0, times)
        if delta2 == 0.0:
            B = beta_plus * t_pos
            inner = alpha_plus * beta_plus * t_pos ** 2 / 2.0
        else:
            B = beta_plus * (np.exp(1j * delta2 * t_pos) - 1.0) / (1j * delta2)
            inner = (alpha_plus * beta_plus / (1j * delta2)) * (
                t_pos - (1.0 - np.exp(-1j * delta2 * t_pos)) / (1j * delta2)
            )
        K = np.where(before, 0.0j, beta_plus + 0.0j)
        channels = DrivenChannels(E0=float(E0), B=np.asarray(B, dtype=complex),
                                  inner=np.asarray(inner, dtype=complex), K=K)
        return alpha, beta, channels

    def check_tail(self, traj: BogoliubovTrajectory) -> None:
        """
        Verify the demodulated tail alpha e^{i omega2 t}, beta e^{i omega2 t} is flat.

        Raises:
            WindowTooShortError: if the last tenth of the post-switch window drifts
        """
        t_max = traj.window[1]
        tail = traj.times >= (1.0 - self.TAIL_FRACTION) * t_max
        if np.count_nonzero(tail) < 2:
            return
        demod = np.exp(1j * traj.profile.omega2 * traj.times[tail])
        dev = max(
            float(np.max(np.abs(traj.alpha[tail] * demod - traj.alpha_inf))),
            float(np.max(np.abs(traj.beta[tail] * demod - traj.beta_inf))),
        )
        tol = traj.cfg.tail_flatness_tol * abs(traj.alpha_inf)
        if dev > tol:
            raise WindowTooShortError("final", dev, tol)

    def check_switch_resolved(self, traj: BogoliubovTrajectory) -> None:
        """
        A fast smooth switch must reproduce the sudden photon number (rho - 1)^2 / (4 rho).

        Raises:
            IntegratorFailureError: if |beta_inf|^2 misses the sudden value, i.e.
                the integration stepped over the switch
        """
        profile = traj.profile
        if profile.kind != ProfileKind.SMOOTH or profile.is_constant:
            return
        if profile.tau * max(profile.omega1, profile.omega2) > self.FAST_SWITCH:
            return
        rho = profile.omega2 / profile.omega1
        expected = (rho - 1.0) ** 2 / (4.0 * rho)
        rel = abs(traj.n_dce - expected) / expected
        if rel > self.FAST_SWITCH_TOL:
            raise IntegratorFailureError(
                f"switch of width tau = {profile.tau:.3g} not resolved: |beta_inf|^2 = {traj.n_dce:.6e}, "
                f"sudden limit {expected:.6e}",
                {"n_dce": traj.n_dce, "expected": expected, "tau": profile.tau},
            )

    def with_channels(self, traj: BogoliubovTrajectory, E0: float) -> DrivenChannels:
        """Driven channels for ``E0``, reusing the trajectory's when they match."""
        if traj.channels is not None and traj.channels.E0 == E0:
            return traj.channels
        refreshed = self.integrate(traj.profile, traj.cfg, E0=E0)
        return refreshed.channels


bogoliubov_engine = BogoliubovEngine()


def integrate_bogoliubov(profile: FrequencyProfile, cfg: NumericsConfig) -> BogoliubovTrajectory:
    return bogoliubov_engine.integrate(profile, cfg)


def extract_asymptotics(traj: BogoliubovTrajectory) -> Tuple[complex, complex]:
    """
    Asymptotic constants alpha(t_max) e^{i omega2 t_max}, beta(t_max) e^{i omega2 t_max}.

    The tail flatness check is repeated so a trajectory built elsewhere is
    held to the same contract.
    """
    bogoliubov_engine.check_tail(traj)
    return traj.alpha_inf, traj.beta_inf


def dce_photon_number(beta_inf: complex) -> float:
    """Mean number of photons created by the switch, |beta_inf|^2."""
    return abs(beta_inf) ** 2
