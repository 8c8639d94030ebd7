import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from app import __version__
from app.api.v1.api import api_router
from app.core.config import settings
from app.core.exceptions import InputValidationError, SimulationError
from app.core.logging import setup_simulation_logger


# --- Lifespan: logging is configured once the server starts ---
@asynccontextmanager
async def lifespan(app: FastAPI):
    app.state.logger = setup_simulation_logger()
    app.state.logger.info(f"{settings.PROJECT_NAME} {__version__} starting ({settings.ENVIRONMENT})")
    yield


# --- App Initialization ---
app = FastAPI(
    title=settings.PROJECT_NAME,
    openapi_url=f"{settings.API_V1_STR}/openapi.json",
    version=__version__,
    description="Dynamical Casimir effect with a two-level atom: sudden, transient and exact-evolution results.",
    lifespan=lifespan,
)


# --- Exception Handlers ---
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    errors = [{"loc": " -> ".join(map(str, e["loc"])), "msg": e["msg"]} for e in exc.errors()]
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": "Validation Error", "errors": errors},
    )


@app.exception_handler(InputValidationError)
async def input_exception_handler(request: Request, exc: InputValidationError):
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": exc.message, "error": type(exc).__name__, "details": exc.details},
    )


@app.exception_handler(SimulationError)
async def simulation_exception_handler(request: Request, exc: SimulationError):
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": exc.message, "error": type(exc).__name__, "details": exc.details},
    )


# --- Health Check Endpoint ---
@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint for monitoring."""
    return {
        "status": "healthy",
        "timestamp": time.time(),
        "version": __version__,
        "environment": settings.ENVIRONMENT,
    }


# --- API Router ---
app.include_router(api_router, prefix=settings.API_V1_STR)


# --- Root Endpoint ---
@app.get("/", tags=["Root"])
async def read_root():
    return {"message": f"Welcome to the {settings.PROJECT_NAME}"}
