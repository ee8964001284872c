"""FastAPI application exposing generation, solving, and benchmarking.

The CLI talks to these endpoints through an in-process client by
default; ``seqcflp serve`` runs the same app under uvicorn for remote
use.  Solver limit hits are ordinary responses (the report carries the
residual gap); malformed instances and refused budgets map to 400.
"""

from __future__ import annotations

import time

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..approx import solve_approx
from ..bnc import SolverConfig, solve_exact
from ..model import DomainError, Instance
from ..oracle import OracleBudgetError, solve_enumeration
from ..separation import SeparationBudgetError
from ..workbench.generate import GeneratorSpec, generate_instance, weights_from_geometry
from ..workbench.io import InstanceFormatError
from . import schemas

__all__ = ["create_app"]


def _solver_config(options: schemas.SolveOptions) -> SolverConfig:
    try:
        return SolverConfig(
            cut_families=options.cuts,
            separation=options.separation,
            tol=options.tol,
            time_limit=options.time_limit,
            node_limit=options.node_limit,
            log_every=options.log_every,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _instance(model: schemas.InstanceModel) -> Instance:
    try:
        return model.to_instance()
    except InstanceFormatError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(
        title="seqcflp",
        version=__version__,
        description="Sequential competitive facility location solvers",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate(request: schemas.GenerateRequest) -> schemas.GenerateResponse:
        alpha = request.alpha
        try:
            spec = GeneratorSpec(
                num_customers=request.num_customers,
                num_sites=request.num_sites,
                p=request.p,
                r=request.r,
                beta=request.beta,
                alpha=tuple(alpha) if isinstance(alpha, list) else alpha,
                seed=request.seed,
                square_side=request.square_side,
                demand=request.demand,
            )
            inst, geometry = generate_instance(spec)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.GenerateResponse(
            name=spec.name,
            instance=schemas.InstanceModel.from_instance(inst, geometry),
        )

    @app.post("/solve", response_model=schemas.SolveResponse)
    def solve(request: schemas.SolveRequest) -> schemas.SolveResponse:
        inst = _instance(request.instance)
        config = _solver_config(request.options)
        try:
            report = solve_exact(inst, config)
        except (DomainError, SeparationBudgetError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.SolveResponse(**report.to_dict())

    @app.post("/approx", response_model=schemas.ApproxResponse)
    def approx(request: schemas.ApproxRequest) -> schemas.ApproxResponse:
        inst = _instance(request.instance)
        config = _solver_config(request.options)
        try:
            report = solve_approx(inst, config)
        except DomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.ApproxResponse(**report.to_dict())

    @app.post("/oracle", response_model=schemas.OracleResponse)
    def oracle(request: schemas.OracleRequest) -> schemas.OracleResponse:
        inst = _instance(request.instance)
        start = time.monotonic()
        try:
            result = solve_enumeration(inst, budget=request.budget)
        except (OracleBudgetError, SeparationBudgetError) as exc:
            # a refusal, not a malformed input: the instance is too large
            raise HTTPException(status_code=413, detail=str(exc)) from exc
        return schemas.OracleResponse(
            z_star=result.z_star,
            best_sites=list(result.x_support),
            evaluations=result.evaluations,
            wall_time=time.monotonic() - start,
        )

    @app.post("/sweep-beta", response_model=schemas.SweepResponse)
    def sweep_beta(request: schemas.SweepRequest) -> schemas.SweepResponse:
        model = request.instance
        if model.geometry is None:
            raise HTTPException(
                status_code=400,
                detail="instance.geometry: beta sweeps need stored coordinates",
            )
        inst = _instance(model)
        config = _solver_config(request.options)
        geo = model.geometry
        rows = []
        for beta in request.betas:
            if beta < 0:
                raise HTTPException(status_code=400, detail="betas must be nonnegative")
            w = weights_from_geometry(geo.alpha, beta, geo.customer_xy, geo.site_xy)
            swept = Instance(h=inst.h, w=w, ul=inst.ul, uf=inst.uf, p=inst.p, r=inst.r)
            report = solve_exact(swept, config)
            rows.append(
                schemas.SweepRow(
                    beta=beta,
                    z_best=report.z_best,
                    status=report.status,
                    num_nodes=report.num_nodes,
                    num_cuts=report.num_cuts,
                    best_sites=list(report.best_x.support) if report.best_x else None,
                    wall_time=report.wall_time,
                )
            )
        return schemas.SweepResponse(rows=rows)

    return app
