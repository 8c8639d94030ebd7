import math
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from app.core.exceptions import InputValidationError, WindowTooShortError
from app.schemas.model import ModelParams, NumericsConfig, ProfileKind

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class FrequencyProfile:
    """
    Time-dependent mode frequency omega(t).

    ``smooth`` is the logistic switch (omega1 + omega2 e^{t/tau}) / (1 + e^{t/tau});
    ``sudden`` jumps at t = 0 (its derivative is a delta function, handled
    analytically by the engines); ``custom`` is a monotone (PCHIP) interpolant
    through a table, held constant outside it.
    """
    kind: ProfileKind
    omega1: float
    omega2: float
    tau: float = 0.0
    table_t: Optional[Tuple[float, ...]] = None
    table_omega: Optional[Tuple[float, ...]] = None
    _spline: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)
    _primitive: Optional[object] = field(default=None, repr=False, compare=False)

    # e^{-40} below any integrator tolerance: the logistic switch is over outside +-40 tau
    SWITCH_HALF_WIDTH = 40.0
    STEPS_PER_TAU = 10.0

    def __post_init__(self):
        if self.kind == ProfileKind.CUSTOM:
            t = np.asarray(self.table_t, dtype=float)
            w = np.asarray(self.table_omega, dtype=float)
            spline = PchipInterpolator(t, w, extrapolate=False)
            object.__setattr__(self, "_spline", spline)
            object.__setattr__(self, "_primitive", spline.antiderivative())

    @property
    def is_constant(self) -> bool:
        return self.omega1 == self.omega2 and self.kind != ProfileKind.CUSTOM

    def switch_interval(self) -> Optional[Tuple[float, float, float]]:
        """
        Interval where omega changes, with the largest step that resolves it.

        Returns:
            (start, end, max_step), or None for constant and sudden profiles
        """
        if self.is_constant or self.kind == ProfileKind.SUDDEN:
            return None
        if self.kind == ProfileKind.SMOOTH:
            half = self.SWITCH_HALF_WIDTH * self.tau
            return -half, half, self.tau / self.STEPS_PER_TAU
        spacing = float(np.min(np.diff(self.table_t)))
        return self.table_t[0], self.table_t[-1], spacing / 4.0

    def evaluate(self, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """
        Evaluate omega and its time derivative.

        Args:
            t: Time (scalar or array)

        Returns:
            (omega, omega_dot) with the shape of ``t``
        """
        t_arr = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t_arr)):
            raise InputValidationError("frequency profile evaluated at a non-finite time")

        if self.kind == ProfileKind.SMOOTH:
            x = t_arr / self.tau
            # expit(x) * expit(-x) keeps both tails accurate without overflow
            s = expit(x)
            omega = self.omega1 + (self.omega2 - self.omega1) * s
            omega_dot = (self.omega2 - self.omega1) * s * expit(-x) / self.tau
        elif self.kind == ProfileKind.SUDDEN:
            omega = np.where(t_arr < 0.0, self.omega1, self.omega2)
            omega_dot = np.zeros_like(t_arr)
        else:
            t0, t1 = self.table_t[0], self.table_t[-1]
            clipped = np.clip(t_arr, t0, t1)
            omega = self._spline(clipped)
            omega_dot = np.where((t_arr < t0) | (t_arr > t1), 0.0, self._spline(clipped, 1))

        if np.ndim(t) == 0:
            return float(omega), float(omega_dot)
        return omega, omega_dot

    def phase(self, t: ArrayLike) -> ArrayLike:
        """
        Accumulated phase Phi(t) with dPhi/dt = omega.

        Normalised so that Phi(t) - omega2 t -> 0 for t -> +inf; for the smooth
        profile Phi(t) - omega1 t -> 0 for t -> -inf as well.
        """
        t_arr = np.asarray(t, dtype=float)
        if self.kind == ProfileKind.SMOOTH:
            x = t_arr / self.tau
            phi = self.omega1 * t_arr + (self.omega2 - self.omega1) * self.tau * np.logaddexp(0.0, x)
        elif self.kind == ProfileKind.SUDDEN:
            phi = np.where(t_arr < 0.0, self.omega1 * t_arr, self.omega2 * t_arr)
        else:
            t0, t1 = self.table_t[0], self.table_t[-1]
            clipped = np.clip(t_arr, t0, t1)
            inside = self.omega2 * t1 + (self._primitive(clipped) - self._primitive(t1))
            phi_start = self.omega2 * t1 + (self._primitive(t0) - self._primitive(t1))
            phi = np.where(
                t_arr > t1,
                self.omega2 * t_arr,
                np.where(t_arr < t0, phi_start + self.omega1 * (t_arr - t0), inside),
            )
        if np.ndim(t) == 0:
            return float(phi)
        return phi

    def check_window(self, t_min: float, t_max: float, tol: float) -> None:
        """
        Verify omega has reached its asymptotes at both window edges.

        Raises:
            WindowTooShortError: naming the edge that misses the tolerance
        """
        w_lo, _ = self.evaluate(t_min)
        w_hi, _ = self.evaluate(t_max)
        dev_lo = abs(w_lo - self.omega1) / self.omega1
        dev_hi = abs(w_hi - self.omega2) / self.omega2
        if dev_lo > tol:
            raise WindowTooShortError("initial", dev_lo, tol)
        if dev_hi > tol:
            raise WindowTooShortError("final", dev_hi, tol)


def make_profile(
    kind: ProfileKind,
    omega1: float,
    omega2: float,
    tau: float = 0.0,
    table: Optional[Sequence[Sequence[float]]] = None,
) -> FrequencyProfile:
    """
    Build a validated frequency profile.

    Args:
        kind: Profile shape
        omega1: Initial frequency (ignored for ``custom``, taken from the table)
        omega2: Final frequency (ignored for ``custom``)
        tau: Switching time for ``smooth``
        table: Rows (t, omega) for ``custom``

    Returns:
        FrequencyProfile
    """
    if kind == ProfileKind.CUSTOM:
        if table is None or len(table) < 4:
            raise InputValidationError("custom profile needs a table of at least 4 (t, omega) rows")
        arr = np.asarray(table, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InputValidationError("custom profile table must have rows (t, omega)")
        if not np.all(np.isfinite(arr)):
            raise InputValidationError("custom profile table contains non-finite values")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise InputValidationError("custom profile times must be strictly increasing")
        if np.any(arr[:, 1] <= 0):
            raise InputValidationError("custom profile frequencies must be positive")
        profile = FrequencyProfile(
            kind=kind,
            omega1=float(arr[0, 1]),
            omega2=float(arr[-1, 1]),
            table_t=tuple(arr[:, 0]),
            table_omega=tuple(arr[:, 1]),
        )
        # PCHIP stays within the range of neighbouring table values, so positivity carries over
        return profile

    if not (omega1 > 0 and omega2 > 0 and math.isfinite(omega1) and math.isfinite(omega2)):
        raise InputValidationError("mode frequencies must be positive and finite")
    if kind == ProfileKind.SMOOTH:
        if not math.isfinite(tau) or tau < 0:
            raise InputValidationError("tau must be finite and non-negative")
        if tau == 0.0:
            raise InputValidationError(
                "smooth profile with tau = 0 is singular; use the sudden profile kind"
            )
        return FrequencyProfile(kind=kind, omega1=float(omega1), omega2=float(omega2), tau=float(tau))
    return FrequencyProfile(kind=ProfileKind.SUDDEN, omega1=float(omega1), omega2=float(omega2))


def profile_for(params: ModelParams, table: Optional[Sequence[Sequence[float]]] = None) -> FrequencyProfile:
    """Profile implied by model parameters: tabulated, sudden for tau = 0, smooth otherwise."""
    if table is not None:
        return make_profile(ProfileKind.CUSTOM, params.omega1, params.omega2, table=table)
    if params.tau == 0.0:
        return make_profile(ProfileKind.SUDDEN, params.omega1, params.omega2)
    return make_profile(ProfileKind.SMOOTH, params.omega1, params.omega2, params.tau)


def profile_window(profile: FrequencyProfile, cfg: NumericsConfig) -> Tuple[float, float]:
    """Window for a profile; custom tables are always covered by the window."""
    t_min, t_max = cfg.resolve_window(profile.omega1, profile.omega2, profile.tau)
    if profile.kind == ProfileKind.CUSTOM:
        if cfg.t_min is None:
            t_min = min(t_min, profile.table_t[0] - cfg.window_period_multiple / profile.omega1)
        if cfg.t_max is None:
            t_max = max(t_max, profile.table_t[-1] + cfg.window_period_multiple / profile.omega2)
    return t_min, t_max


def eval_frequency(profile: FrequencyProfile, t: float) -> Tuple[float, float]:
    """Return (omega(t), omega_dot(t))."""
    return profile.evaluate(t)
