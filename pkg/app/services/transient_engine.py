import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from app.core.exceptions import BaselineUndefinedError, ResonanceError
from app.schemas.model import ModelParams, ProfileKind
from app.services.bogoliubov_engine import BogoliubovTrajectory, bogoliubov_engine

logger = logging.getLogger(__name__)

BASELINE_MIN = 1e-12


@dataclass(frozen=True)
class TransientResult:
    """First-order excitation of the atom for a finite switching time."""
    B_samples: np.ndarray
    F: float
    w_up: float
    Delta2: float
    N_dce: float
    F_numeric: float
    F_tail_error: float
    first_order_parameter: float


class TransientEngine:
    """First-order perturbation theory in the atom-field coupling."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def compute_B(self, traj: BogoliubovTrajectory, E0: float) -> np.ndarray:
        """
        B(t) = integral from t_min to t of beta(t') e^{i E0 t'} dt'.

        Integrated by the same adaptive scheme as the trajectory itself.
        """
        return bogoliubov_engine.with_channels(traj, E0).B

    def _check_baseline(self, traj: BogoliubovTrajectory, E0: float) -> float:
        if abs(traj.beta_inf) < BASELINE_MIN:
            raise BaselineUndefinedError(
                f"|beta_inf| = {abs(traj.beta_inf):.3e} is below {BASELINE_MIN:g}; "
                "the switch is adiabatic and the efficiency is undefined"
            )
        delta2 = E0 - traj.profile.omega2
        if delta2 == 0.0:
            raise ResonanceError("efficiency undefined at exact resonance E0 = omega2")
        return delta2

    def excitation_efficiency_F(self, traj: BogoliubovTrajectory, E0: float) -> float:
        """
        Efficiency F = |integral e^{i Delta2 t} d/dt[(beta / beta_inf) e^{i omega2 t}] dt|^2.

        The derivative comes from the equations of motion, so the integrand is
        e^{i E0 t} (i (omega2 - omega) beta - (omega_dot / 2 omega) alpha*) / beta_inf.

        Raises:
            BaselineUndefinedError: if |beta_inf| < 1e-12
            ResonanceError: if E0 = omega2
        """
        self._check_baseline(traj, E0)
        K = bogoliubov_engine.with_channels(traj, E0).K
        return float(abs(K[-1]) ** 2 / abs(traj.beta_inf) ** 2)

    def efficiency_from_samples(self, traj: BogoliubovTrajectory, E0: float) -> float:
        """F from a spline derivative of the sampled beta e^{i omega2 t}; an independent check."""
        delta2 = self._check_baseline(traj, E0)
        if traj.profile.kind == ProfileKind.SUDDEN:
            # the integrand is a unit delta function at t = 0
            return 1.0
        t = traj.times
        f = traj.beta * np.exp(1j * traj.profile.omega2 * t) / traj.beta_inf
        derivative = CubicSpline(t, f).derivative()(t)
        integral = simpson(np.exp(1j * delta2 * t) * derivative, x=t)
        return float(abs(integral) ** 2)

    def tail_error(self, traj: BogoliubovTrajectory, E0: float) -> float:
        """
        Bound on F from the integrand left outside the window.

        The integrand decays like e^{-|t|/tau} beyond the switch, so each edge
        contributes about tau times the integrand magnitude there.
        """
        tau = traj.profile.tau
        if tau == 0.0:
            return 0.0
        omega2 = traj.profile.omega2
        edges = []
        for idx in (0, -1):
            t = traj.times[idx]
            omega, omega_dot = traj.profile.evaluate(t)
            value = 1j * (omega2 - omega) * traj.beta[idx] - omega_dot / (2.0 * omega) * np.conj(traj.alpha[idx])
            edges.append(abs(value))
        K = bogoliubov_engine.with_channels(traj, E0).K
        scale = abs(traj.beta_inf)
        return float(2.0 * abs(K[-1]) * tau * sum(edges) / scale ** 2)

    def b_two_term(self, traj: BogoliubovTrajectory, E0: float) -> np.ndarray:
        """
        B(t) rebuilt from the integration by parts
        B = (-i / Delta2) [beta(t) e^{i E0 t} - K(t)].
        """
        delta2 = E0 - traj.profile.omega2
        if delta2 == 0.0:
            raise ResonanceError("two-term split of B needs E0 != omega2")
        K = bogoliubov_engine.with_channels(traj, E0).K
        return (-1j / delta2) * (traj.beta * np.exp(1j * E0 * traj.times) - K)

    def excitation_probability_transient(self, traj: BogoliubovTrajectory, params: ModelParams) -> TransientResult:
        """
        Transient excitation probability w_up = (lambda / Delta2)^2 N_dce F.

        Args:
            traj: Bogoliubov trajectory of the switch
            params: Model parameters (E0 and lambda are used)

        Returns:
            TransientResult with every intermediate quantity
        """
        E0 = params.E0
        delta2 = self._check_baseline(traj, E0)
        channels = bogoliubov_engine.with_channels(traj, E0)
        n_dce = traj.n_dce
        F = float(abs(channels.K[-1]) ** 2 / n_dce)
        w_up = (params.lam / delta2) ** 2 * n_dce * F
        first_order = params.lam * float(np.max(np.abs(channels.B)))
        if first_order > 0.1:
            self.logger.warning(f"lambda max|B| = {first_order:.3f}; first-order result is unreliable")
        return TransientResult(
            B_samples=channels.B,
            F=F,
            w_up=w_up,
            Delta2=delta2,
            N_dce=n_dce,
            F_numeric=self.efficiency_from_samples(traj, E0),
            F_tail_error=self.tail_error(traj, E0),
            first_order_parameter=first_order,
        )


transient_engine = TransientEngine()


def compute_B(traj: BogoliubovTrajectory, E0: float) -> np.ndarray:
    return transient_engine.compute_B(traj, E0)


def excitation_efficiency_F(traj: BogoliubovTrajectory, E0: float) -> float:
    return transient_engine.excitation_efficiency_F(traj, E0)


def excitation_probability_transient(traj: BogoliubovTrajectory, params: ModelParams) -> TransientResult:
    return transient_engine.excitation_probability_transient(traj, params)
