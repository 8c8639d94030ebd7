import math
from typing import Any, Dict, List, Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.schemas.model import ModelParams, NumericsConfig
from app.schemas.scenario import ScenarioConfig
from app.services.bogoliubov_engine import bogoliubov_engine
from app.services.frequency_profile import profile_for
from app.services.lamb_shift_engine import lamb_shift_engine
from app.services.scenario_runner import scenario_runner, sudden_w_up
from app.services.sudden_engine import (
    excitation_strong_coupling,
    excitation_weak_coupling,
    excitation_weak_coupling_series,
    mean_photons_with_atom,
)
from app.services.transient_engine import transient_engine

router = APIRouter()


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


# Pydantic models for API requests/responses
class SuddenRequest(BaseModel):
    rho: float = Field(..., gt=0, description="Frequency ratio omega2 / omega1")
    xi: float = Field(..., description="Dimensionless coupling lambda / Delta")
    series_tol: float = Field(1e-12, gt=0)


class SuddenResponse(BaseModel):
    w_up: float
    w_weak_coupling: float
    w_weak_coupling_series: float
    w_strong_coupling: float
    n_dce: float
    n_bar: float
    direct_sum: float


class ShakingResponse(BaseModel):
    E_L_initial: float
    E_L_final: float
    delta_E_L: float
    w_shake: float
    lam: float


class TransientRequest(BaseModel):
    params: ModelParams = Field(default_factory=ModelParams)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    profile_table: Optional[List[List[float]]] = None


class TransientResponse(BaseModel):
    F: float
    w_up: float
    Delta2: float
    N_dce: float
    F_numeric: float
    F_tail_error: float
    first_order_parameter: float


class ScenarioResponse(BaseModel):
    scenario: str
    columns: List[str]
    rows: List[List[Any]]
    metadata: Dict[str, Any]
    passed: Optional[bool] = None
    notes: List[str] = []


@router.post("/sudden", response_model=SuddenResponse)
def sudden_excitation(request: SuddenRequest):
    """Instantaneous-switch excitation probability with its limits and the photon bookkeeping."""
    report = mean_photons_with_atom(request.rho, request.xi, request.series_tol)
    return SuddenResponse(
        w_up=sudden_w_up(request.rho, request.xi, request.series_tol),
        w_weak_coupling=excitation_weak_coupling(request.rho, request.xi),
        w_weak_coupling_series=excitation_weak_coupling_series(request.rho, request.xi),
        w_strong_coupling=excitation_strong_coupling(request.rho),
        n_dce=report.n_dce,
        n_bar=report.n_bar,
        direct_sum=report.direct_sum,
    )


@router.post("/shaking", response_model=ShakingResponse)
def shaking(params: ModelParams):
    """Lamb shifts before and after the switch and the shaking excitation probability."""
    report = lamb_shift_engine.shaking_probability(params)
    return ShakingResponse(
        E_L_initial=report.E_L_initial,
        E_L_final=report.E_L_final,
        delta_E_L=report.delta_E_L,
        w_shake=report.w_shake,
        lam=report.lam,
    )


@router.post("/transient", response_model=TransientResponse)
def transient(request: TransientRequest):
    """First-order excitation probability for a finite switching time."""
    params = request.params
    profile = profile_for(params, request.profile_table)
    traj = bogoliubov_engine.integrate(profile, request.numerics, E0=params.E0)
    result = transient_engine.excitation_probability_transient(traj, params)
    return TransientResponse(
        F=result.F,
        w_up=result.w_up,
        Delta2=result.Delta2,
        N_dce=result.N_dce,
        F_numeric=result.F_numeric,
        F_tail_error=result.F_tail_error,
        first_order_parameter=result.first_order_parameter,
    )


@router.post("/scenarios", response_model=ScenarioResponse)
def run_scenario(config: ScenarioConfig):
    """Run a scenario and return the rows the CLI would write, without touching disk."""
    result = scenario_runner.run(config, write=False)
    return ScenarioResponse(
        scenario=result.scenario.value,
        columns=result.columns,
        rows=[[_finite_or_none(value) for value in row] for row in result.rows],
        metadata=result.metadata,
        passed=result.passed,
        notes=result.notes,
    )
