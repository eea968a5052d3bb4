"""HTTP face of the package. Every route is a thin binding onto handlers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..core import ParameterError, PonziRuleError
from . import handlers, schemas

app = FastAPI(
    title="poolpay",
    version=__version__,
    description="Pool reward schedules under per-share discounting: "
    "closed-form optima, rule evaluation, and seeded simulation.",
)


@app.exception_handler(PonziRuleError)
async def _invalid_rule(request: Request, exc: PonziRuleError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"error": "invalid_rule", "message": str(exc)}
    )


@app.exception_handler(ParameterError)
async def _bad_input(request: Request, exc: ParameterError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"error": "bad_input", "message": str(exc)}
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return handlers.handle_health()


@app.post("/optimize", response_model=schemas.OptimizeResponse)
def optimize(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    return handlers.handle_optimize(req)


@app.post("/evaluate", response_model=schemas.EvaluateResponse)
def evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    return handlers.handle_evaluate(req)


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    return handlers.handle_simulate(req)


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    return handlers.handle_sweep(req)


@app.post("/payoff", response_model=schemas.PayoffResponse)
def payoff(req: schemas.PayoffRequest) -> schemas.PayoffResponse:
    return handlers.handle_payoff(req)


@app.post("/check", response_model=schemas.CheckResponse)
def check(req: schemas.CheckRequest) -> schemas.CheckResponse:
    return handlers.handle_check(req)
