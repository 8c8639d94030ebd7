import math
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings


# Enums
class DetuningReference(str, Enum):
    """Mode frequency the sudden-limit detuning is taken at."""
    FINAL = "final"
    INITIAL = "initial"


class ProfileKind(str, Enum):
    """Shape of the mode-frequency switch."""
    SMOOTH = "smooth"
    SUDDEN = "sudden"
    CUSTOM = "custom"


class ModelParams(BaseModel):
    """Scalar physics inputs of the atom + cavity-mode model."""
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    E0: float = Field(0.8, gt=0, description="Atomic transition frequency")
    omega1: float = Field(0.5, gt=0, description="Mode frequency before the switch")
    omega2: float = Field(5.0, gt=0, description="Mode frequency after the switch")
    lam: float = Field(0.01, ge=0, alias="lambda", description="Atom-field coupling constant")
    tau: float = Field(1.0, ge=0, description="Characteristic switching time")
    detuning_reference: DetuningReference = Field(
        default=DetuningReference.FINAL,
        description="Mode frequency used for the detuning entering xi",
    )

    @model_validator(mode="after")
    def check_finite(self) -> "ModelParams":
        for name in ("E0", "omega1", "omega2", "lam", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    @property
    def rho(self) -> float:
        """Frequency ratio omega2 / omega1."""
        return self.omega2 / self.omega1

    @property
    def Delta(self) -> float:
        """Detuning used by the sudden-limit formulas."""
        if self.detuning_reference == DetuningReference.INITIAL:
            return self.E0 - self.omega1
        return self.E0 - self.omega2

    @property
    def Delta2(self) -> float:
        """Out-frequency detuning E0 - omega2."""
        return self.E0 - self.omega2

    @property
    def xi(self) -> float:
        """Dimensionless coupling lambda / Delta (infinite at resonance)."""
        if self.Delta == 0.0:
            return math.inf if self.lam > 0 else 0.0
        return self.lam / self.Delta

    @property
    def Theta(self) -> float:
        """Squeezing parameter of the sudden quench, ln(rho) / 2."""
        return 0.5 * math.log(self.rho)

    @property
    def n_dce_sudden(self) -> float:
        """Photon number of the instantaneous quench, (rho - 1)^2 / (4 rho)."""
        return (self.rho - 1.0) ** 2 / (4.0 * self.rho)

    def with_updates(self, **changes) -> "ModelParams":
        """Return a validated copy with some fields replaced (``lambda`` accepted)."""
        data = self.model_dump(by_alias=True)
        if "lam" in changes:
            changes["lambda"] = changes.pop("lam")
        data.update(changes)
        return ModelParams.model_validate(data)


class NumericsConfig(BaseModel):
    """Numerical controls shared by every engine."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_min: Optional[float] = Field(None, lt=0, description="Window start; default derived from the profile")
    t_max: Optional[float] = Field(None, gt=0, description="Window end; default derived from the profile")
    window_tau_multiple: float = Field(25.0, gt=0, description="Window half-width in units of tau")
    window_period_multiple: float = Field(40.0, gt=0, description="Window half-width in units of 1/omega")
    ode_rel_tol: float = Field(1e-11, gt=0, description="Adaptive integrator relative tolerance")
    ode_abs_tol: float = Field(1e-13, gt=0, description="Adaptive integrator absolute tolerance")
    series_tol: float = Field(1e-12, gt=0, description="Relative truncation threshold for infinite sums")
    asymptote_tol: float = Field(1e-8, gt=0, description="Relative tolerance of omega(t) at the window edges")
    tail_flatness_tol: float = Field(1e-5, gt=0, description="Flatness tolerance of the demodulated tail")
    fock_max: int = Field(default_factory=lambda: settings.DEFAULT_FOCK_MAX, ge=2,
                          description="Fock truncation of the exact-evolution oracle")
    truncation_tol: float = Field(1e-6, gt=0, description="Allowed population of the top two Fock levels")
    norm_tol: float = Field(1e-8, gt=0, description="Allowed norm drift of the oracle")
    oracle_max_step: float = Field(0.25, gt=0, description="Largest oracle time step")
    rotating_wave: bool = Field(False, description="Drop counter-rotating atom-field terms in the oracle")
    sample_count: int = Field(2001, ge=3, description="Number of output samples over the window")

    @model_validator(mode="after")
    def check_window(self) -> "NumericsConfig":
        if self.t_min is not None and self.t_max is not None and not self.t_min < 0 < self.t_max:
            raise ValueError("window must satisfy t_min < 0 < t_max")
        return self

    def resolve_window(self, omega1: float, omega2: float, tau: float) -> Tuple[float, float]:
        """
        Integration window for a profile.

        Args:
            omega1: Initial mode frequency
            omega2: Final mode frequency
            tau: Switching time (0 for a sudden switch)

        Returns:
            (t_min, t_max), explicit bounds taking precedence over the defaults
        """
        t_min = self.t_min
        t_max = self.t_max
        if t_min is None:
            t_min = -max(self.window_tau_multiple * tau, self.window_period_multiple / omega1)
        if t_max is None:
            t_max = max(self.window_tau_multiple * tau, self.window_period_multiple / omega2)
        return float(t_min), float(t_max)

    def with_updates(self, **changes) -> "NumericsConfig":
        data = self.model_dump()
        data.update(changes)
        return NumericsConfig.model_validate(data)
