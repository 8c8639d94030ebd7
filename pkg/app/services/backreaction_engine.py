import math
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from app.core.exceptions import BaselineUndefinedError, InputValidationError
from app.schemas.model import ModelParams, NumericsConfig
from app.services.bogoliubov_engine import BogoliubovTrajectory, bogoliubov_engine
from app.services.frequency_profile import FrequencyProfile, profile_for
from app.services.transient_engine import BASELINE_MIN

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BackreactionResult:
    """Second-order change of the photon number caused by the atom."""
    delta_N_samples: np.ndarray
    delta_N_inf: float
    eta: float
    N_dce: float
    params: ModelParams
    eta_window_error: Optional[float]
    F: float
    combined_correction: float


def tail_average(times: np.ndarray, values: np.ndarray, period: Optional[float], fraction: float = 0.1) -> float:
    """
    Average of sampled values over an integer number of periods in the last part of the window.

    With no period (or a period longer than the tail) the whole tail is used.
    """
    t_max = times[-1]
    span = fraction * t_max
    if period is not None and 0 < period <= span:
        span = math.floor(span / period) * period
    start = t_max - span
    mask = times >= start - (times[1] - times[0])
    if np.count_nonzero(mask) < 4:
        return float(values[-1])
    spline = CubicSpline(times[mask], values[mask])
    return float(spline.integrate(start, t_max) / span)


class BackreactionEngine:
    """Atomic back reaction on the number of photons created by the switch."""

    TAIL_FRACTION = 0.1
    WINDOW_STRETCH = 1.2

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def delta_N_reduced(self, traj: BogoliubovTrajectory, B_samples: np.ndarray, E0: float) -> np.ndarray:
        """delta_N / lambda^2, free of the coupling constant."""
        if np.shape(B_samples) != np.shape(traj.times):
            raise InputValidationError(
                f"B samples shape {np.shape(B_samples)} does not match the trajectory grid {np.shape(traj.times)}"
            )
        inner = bogoliubov_engine.with_channels(traj, E0).inner
        alpha, beta = traj.alpha, traj.beta
        return 2.0 * (
            np.abs(alpha) ** 2 * np.abs(B_samples) ** 2
            - 2.0 * np.real(alpha * np.conj(beta) * inner)
        )

    def delta_N(self, traj: BogoliubovTrajectory, B_samples: np.ndarray, E0: float, lam: float) -> np.ndarray:
        """
        Second-order photon-number correction
        2 lam^2 (|alpha|^2 |B|^2 - 2 Re[alpha beta* integral of B alpha* e^{-i E0 t}]).
        """
        return lam * lam * self.delta_N_reduced(traj, B_samples, E0)

    def delta_N_asymptote(self, traj: BogoliubovTrajectory, E0: float, lam: float) -> float:
        """Tail-averaged delta_N at the end of the window."""
        return lam * lam * self._reduced_asymptote(traj, E0)

    def _reduced_asymptote(self, traj: BogoliubovTrajectory, E0: float) -> float:
        channels = bogoliubov_engine.with_channels(traj, E0)
        reduced = self.delta_N_reduced(traj, channels.B, E0)
        delta2 = E0 - traj.profile.omega2
        period = 2.0 * math.pi / abs(delta2) if delta2 != 0.0 else None
        return tail_average(traj.times, reduced, period, self.TAIL_FRACTION)

    def eta(
        self,
        params: ModelParams,
        cfg: NumericsConfig,
        profile: Optional[FrequencyProfile] = None,
        window_check: bool = True,
    ) -> BackreactionResult:
        """
        Back-reaction coefficient eta = E0^2 delta_N_inf / (lambda^2 N_dce).

        eta is formed from delta_N / lambda^2, so it does not depend on lambda at all.

        Args:
            params: Model parameters
            cfg: Numerical controls
            profile: Frequency profile (defaults to the one implied by ``params``)
            window_check: Recompute with t_max stretched by 20% as an error estimate

        Returns:
            BackreactionResult
        """
        profile = profile or profile_for(params)
        E0 = params.E0
        traj = bogoliubov_engine.integrate(profile, cfg, E0=E0)
        n_dce = traj.n_dce
        if abs(traj.beta_inf) < BASELINE_MIN:
            raise BaselineUndefinedError(
                f"|beta_inf| = {abs(traj.beta_inf):.3e}; eta is undefined for an adiabatic switch"
            )

        reduced_inf = self._reduced_asymptote(traj, E0)
        eta = E0 * E0 * reduced_inf / n_dce

        eta_window_error = None
        if window_check:
            t_min, t_max = traj.window
            stretched_cfg = cfg.with_updates(
                t_min=t_min,
                t_max=t_max * self.WINDOW_STRETCH,
                sample_count=int(cfg.sample_count * self.WINDOW_STRETCH),
            )
            stretched = bogoliubov_engine.integrate(profile, stretched_cfg, E0=E0)
            eta_stretched = E0 * E0 * self._reduced_asymptote(stretched, E0) / stretched.n_dce
            eta_window_error = abs(eta_stretched - eta)

        delta2 = E0 - profile.omega2
        F = float(abs(traj.channels.K[-1]) ** 2 / n_dce) if delta2 != 0.0 else math.nan
        combined = eta - E0 * E0 * F / (delta2 * delta2) if delta2 != 0.0 else math.nan

        self.logger.debug(f"eta(tau={params.tau:g}) = {eta:.6e}, window error {eta_window_error}")
        return BackreactionResult(
            delta_N_samples=params.lam * params.lam * self.delta_N_reduced(traj, traj.channels.B, E0),
            delta_N_inf=params.lam * params.lam * reduced_inf,
            eta=eta,
            N_dce=n_dce,
            params=params,
            eta_window_error=eta_window_error,
            F=F,
            combined_correction=combined,
        )


backreaction_engine = BackreactionEngine()


def delta_N(traj: BogoliubovTrajectory, B_samples: np.ndarray, E0: float, lam: float) -> np.ndarray:
    return backreaction_engine.delta_N(traj, B_samples, E0, lam)


def eta(params: ModelParams, cfg: NumericsConfig) -> BackreactionResult:
    return backreaction_engine.eta(params, cfg)
