import math
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from app.core.exceptions import InputValidationError, ResonanceError
from app.schemas.model import ModelParams
from app.services.sudden_engine import squeezed_one_photon, squeezed_vacuum_amplitudes

logger = logging.getLogger(__name__)

# Bare basis label: (photon number, "down" | "up")
BasisLabel = Tuple[int, str]


@dataclass(frozen=True)
class LambShiftReport:
    """Ground-state Lamb shifts before and after the switch and the shaking probability."""
    E_L_initial: float
    E_L_final: float
    delta_E_L: float
    w_shake: float
    lam: float


@dataclass(frozen=True)
class FirstOrderDressedStates:
    """First-order dressed states |n,down>, |n,up> of the full model and their energies."""
    n: int
    down: Dict[BasisLabel, float]
    up: Dict[BasisLabel, float]
    E_down: float
    E_up: float
    mode_dressing: float


class LambShiftEngine:
    """Lamb shift of the atomic ground state and the shaking excitation channel."""

    RESONANCE_GUARD = 1e-6

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def lamb_shift(self, omega: float, E0: float, lam: float) -> float:
        """Ground-state Lamb shift -lambda^2 / (omega + E0)."""
        if omega + E0 <= 0:
            raise InputValidationError("Lamb shift needs omega + E0 > 0")
        return -lam * lam / (omega + E0)

    def shaking_probability(self, params: ModelParams) -> LambShiftReport:
        """
        Excitation by the sudden change of the Lamb shift,
        w = lambda^2 (1/(omega2 + E0) - 1/(omega1 + E0))^2.
        """
        lam = params.lam
        amplitude = lam * (1.0 / (params.omega2 + params.E0) - 1.0 / (params.omega1 + params.E0))
        e_initial = self.lamb_shift(params.omega1, params.E0, lam)
        e_final = self.lamb_shift(params.omega2, params.E0, lam)
        if params.tau * params.E0 > 0.1:
            self.logger.info(
                f"tau E0 = {params.tau * params.E0:.3g}; the shaking estimate assumes an instantaneous switch"
            )
        return LambShiftReport(
            E_L_initial=e_initial,
            E_L_final=e_final,
            delta_E_L=e_final - e_initial,
            w_shake=amplitude * amplitude,
            lam=lam,
        )

    def _check_detuning(self, omega: float, E0: float) -> None:
        if abs(omega - E0) < self.RESONANCE_GUARD * E0:
            raise ResonanceError(
                f"|omega - E0| = {abs(omega - E0):.3e} is below {self.RESONANCE_GUARD:g} E0; "
                "non-resonant perturbation theory does not apply"
            )

    def dressed_states_first_order(self, n: int, omega: float, E0: float, lam: float) -> FirstOrderDressedStates:
        """
        First-order dressed states of the full (counter-rotating) model.

        |n,down> + lam sqrt(n)/(omega-E0) |n-1,up> - lam sqrt(n+1)/(omega+E0) |n+1,up>
        |n,up>   + lam sqrt(n)/(omega+E0) |n-1,down> - lam sqrt(n+1)/(omega-E0) |n+1,down>

        Energies are second order, including the n-proportional dressing
        +-2 lam^2 E0/(omega^2 - E0^2) of the mode frequency.
        """
        if n < 0:
            raise InputValidationError("photon index must be non-negative")
        self._check_detuning(omega, E0)
        minus = omega - E0
        plus = omega + E0
        down: Dict[BasisLabel, float] = {(n, "down"): 1.0}
        up: Dict[BasisLabel, float] = {(n, "up"): 1.0}
        if n >= 1:
            down[(n - 1, "up")] = lam * math.sqrt(n) / minus
            up[(n - 1, "down")] = lam * math.sqrt(n) / plus
        down[(n + 1, "up")] = -lam * math.sqrt(n + 1) / plus
        up[(n + 1, "down")] = -lam * math.sqrt(n + 1) / minus

        dressing = 2.0 * lam * lam * E0 / (omega * omega - E0 * E0)
        return FirstOrderDressedStates(
            n=n,
            down=down,
            up=up,
            E_down=(omega + dressing) * n - lam * lam / plus,
            E_up=(omega - dressing) * n + E0 - lam * lam / minus,
            mode_dressing=dressing,
        )

    def amplitude_split(self, n: int, params: ModelParams, suppress_dce: bool = False) -> Tuple[complex, complex]:
        """
        Split the excitation amplitude into shaking and Casimir parts, first order in lambda.

        A_L = <n,up|_{omega2} |0,down>_{omega1} and
        A_C = <n,up|_{omega2} (e^{-iW} - 1) |0,down>_{omega1}.

        Args:
            n: Photon number of the final state
            params: Model parameters
            suppress_dce: Set the squeezing angle to zero (W = 0)

        Returns:
            (A_L, A_C)
        """
        table = self.amplitude_table(n, params, suppress_dce)
        return table[0][n], table[1][n]

    def amplitude_table(self, n_max: int, params: ModelParams, suppress_dce: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """A_L and A_C for every photon number 0..n_max."""
        if n_max < 0:
            raise InputValidationError("photon index must be non-negative")
        E0, lam = params.E0, params.lam
        self._check_detuning(params.omega1, E0)
        self._check_detuning(params.omega2, E0)

        A_L = np.zeros(n_max + 1, dtype=complex)
        if n_max >= 1:
            A_L[1] = lam * (1.0 / (params.omega2 + E0) - 1.0 / (params.omega1 + E0))

        theta = 0.0 if suppress_dce else params.Theta
        rho = math.exp(2.0 * theta)
        vacuum = squeezed_vacuum_amplitudes(rho, 1e-16)
        size = max(n_max + 3, 2 * vacuum.j_max + 3)
        c = np.zeros(size)
        c[: 2 * vacuum.j_max + 1] = vacuum.fock_amplitudes()
        d = np.zeros(size)
        one = squeezed_one_photon(vacuum, theta)
        d[: len(one)] = one
        c_shift = c.copy()
        c_shift[0] -= 1.0
        d_shift = d.copy()
        d_shift[1] -= 1.0

        k = np.arange(n_max + 1)
        A_C = (
            -lam / (params.omega1 + E0) * d_shift[k]
            + lam * np.sqrt(k) / (params.omega2 + E0) * np.where(k >= 1, c_shift[np.maximum(k - 1, 0)], 0.0)
            - lam * np.sqrt(k + 1) / (params.omega2 - E0) * c_shift[k + 1]
        ).astype(complex)
        return A_L, A_C


lamb_shift_engine = LambShiftEngine()


def lamb_shift(omega: float, E0: float, lam: float) -> float:
    return lamb_shift_engine.lamb_shift(omega, E0, lam)


def shaking_probability(params: ModelParams) -> LambShiftReport:
    return lamb_shift_engine.shaking_probability(params)


def dressed_states_first_order(n: int, omega: float, E0: float, lam: float) -> FirstOrderDressedStates:
    return lamb_shift_engine.dressed_states_first_order(n, omega, E0, lam)


def amplitude_split(n: int, params: ModelParams, suppress_dce: bool = False) -> Tuple[complex, complex]:
    return lamb_shift_engine.amplitude_split(n, params, suppress_dce)
