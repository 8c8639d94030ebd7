import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.model import ModelParams, NumericsConfig


# Enums
class ScenarioKind(str, Enum):
    """Reproducible computations the harness can run."""
    FIG1_SUDDEN_GRID = "fig1_sudden_grid"
    FIG2_TRANSIENT_SWEEP = "fig2_transient_sweep"
    FIG3_BETA_TRACE = "fig3_beta_trace"
    FIG4_ETA_SWEEP = "fig4_eta_sweep"
    SHAKING_REPORT = "shaking_report"
    ORACLE_CHECK = "oracle_check"
    CUSTOM = "custom"


class Spacing(str, Enum):
    LIN = "lin"
    LOG = "log"


class Quantity(str, Enum):
    """Per-point outputs of a custom sweep."""
    N_DCE = "n_dce"
    F = "F"
    W_UP = "w_up"
    ETA = "eta"
    W_SHAKE = "w_shake"
    W_SUDDEN = "w_sudden"


SWEEPABLE_FIELDS = ("E0", "omega1", "omega2", "lam", "tau")

TAU_SWEEPS = (ScenarioKind.FIG2_TRANSIENT_SWEEP, ScenarioKind.FIG4_ETA_SWEEP)


class AxisSpec(BaseModel):
    """Sampled axis: count points from min to max, linear or logarithmic."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    min: float = Field(..., description="First value")
    max: float = Field(..., description="Last value")
    count: int = Field(..., ge=2, description="Number of points")
    spacing: Spacing = Field(default=Spacing.LIN, description="Linear or logarithmic spacing")

    @model_validator(mode="after")
    def check_bounds(self) -> "AxisSpec":
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("axis bounds must be finite")
        if self.min >= self.max:
            raise ValueError("axis min must be below max")
        if self.spacing == Spacing.LOG and self.min <= 0:
            raise ValueError("logarithmic axis needs positive bounds")
        return self

    def values(self) -> np.ndarray:
        if self.spacing == Spacing.LOG:
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


class SweepSpec(AxisSpec):
    """Axis over one ModelParams field."""
    parameter: str = Field(..., description="ModelParams field to sweep (lambda is accepted for lam)")

    @field_validator("parameter")
    @classmethod
    def check_parameter(cls, value: str) -> str:
        if value == "lambda":
            value = "lam"
        if value not in SWEEPABLE_FIELDS:
            raise ValueError(f"sweep parameter must be one of {', '.join(SWEEPABLE_FIELDS)} (or lambda)")
        return value


class ScenarioConfig(BaseModel):
    """One run of the harness, as read from a JSON config file."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioKind = Field(..., description="Computation to run")
    params: ModelParams = Field(default_factory=ModelParams, description="Physics inputs")
    numerics: NumericsConfig = Field(default_factory=NumericsConfig, description="Numerical controls")
    sweep: Optional[SweepSpec] = Field(None, description="Parameter sweep for sweep scenarios")
    grid_rho: AxisSpec = Field(
        default_factory=lambda: AxisSpec(min=0.1, max=100.0, count=31, spacing=Spacing.LOG),
        description="Frequency-ratio axis of the sudden grid",
    )
    grid_xi: AxisSpec = Field(
        default_factory=lambda: AxisSpec(min=0.01, max=100.0, count=41, spacing=Spacing.LOG),
        description="Dimensionless-coupling axis of the sudden grid",
    )
    quantities: List[Quantity] = Field(
        default_factory=lambda: [Quantity.N_DCE, Quantity.F, Quantity.W_UP],
        description="Outputs of a custom sweep",
    )
    profile_table: Optional[List[Tuple[float, float]]] = Field(
        None, description="Rows (t, omega) of a tabulated switch"
    )
    output_path: Optional[str] = Field(None, description="CSV file to write")

    @model_validator(mode="after")
    def check_sweep(self) -> "ScenarioConfig":
        if self.scenario == ScenarioKind.CUSTOM and self.sweep is None:
            raise ValueError("custom scenario needs a sweep")
        if self.scenario in TAU_SWEEPS and self.sweep is not None and self.sweep.parameter != "tau":
            raise ValueError(f"{self.scenario.value} sweeps tau, not {self.sweep.parameter}")
        return self

    def rho_values(self) -> np.ndarray:
        """Grid ratios with rho = 1 always present."""
        values = self.grid_rho.values()
        close = np.isclose(values, 1.0, rtol=1e-9, atol=0.0)
        if np.any(close):
            values[close] = 1.0
        else:
            values = np.sort(np.append(values, 1.0))
        return values
