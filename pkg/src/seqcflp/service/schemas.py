"""Request and response models of the solver service.

The instance payload mirrors the JSON file format of
:mod:`seqcflp.workbench.io`; semantic validation (demand summing to 1,
positive utilities, budget bounds) happens in the core model and is
surfaced as HTTP 400.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..model import Instance
from ..workbench.io import document_from_instance, instance_from_document


class CustomerModel(BaseModel):
    h: float
    uL: float = 0.0
    uF: float = 0.0
    w: list[float]


class GeometryModel(BaseModel):
    beta: float
    alpha: list[float]
    customer_xy: list[list[int]]
    site_xy: list[list[int]]
    seed: int
    square_side: float = 50.0
    demand: str = "uniform"


class InstanceModel(BaseModel):
    version: int = 1
    p: int
    r: int
    customers: list[CustomerModel]
    geometry: GeometryModel | None = None

    def to_instance(self) -> Instance:
        return instance_from_document(self.model_dump(exclude_none=True))

    @classmethod
    def from_instance(cls, inst: Instance, geometry: dict | None = None) -> "InstanceModel":
        return cls.model_validate(document_from_instance(inst, geometry))


class GenerateRequest(BaseModel):
    num_customers: int = Field(ge=1)
    num_sites: int = Field(ge=1)
    p: int = Field(ge=1)
    r: int = Field(ge=1)
    beta: float = 0.1
    alpha: float | list[float] = 0.0
    seed: int = 0
    square_side: float = 50.0
    demand: str = "uniform"


class GenerateResponse(BaseModel):
    name: str
    instance: InstanceModel


class SolveOptions(BaseModel):
    cuts: str = "scbi"
    separation: str = "approx"  # approx == approximate-first (hybrid)
    tol: float = 1e-6
    time_limit: float = 3600.0
    node_limit: int | None = None
    log_every: int = 0


class SolveRequest(BaseModel):
    instance: InstanceModel
    options: SolveOptions = SolveOptions()


class SolveResponse(BaseModel):
    status: str
    z_best: float
    z_bound: float
    gap: float
    best_sites: list[int] | None
    num_nodes: int
    num_lp_solves: int
    num_cuts: dict[str, int]
    lazy_rounds: int
    gap_trace: dict[str, float | None]
    config: dict
    wall_time: float | None = None


class ApproxRequest(BaseModel):
    instance: InstanceModel
    options: SolveOptions = SolveOptions()


class ApproxResponse(BaseModel):
    status: str
    best_sites: list[int]
    surrogate: float
    z_h: float
    gamma_m: float
    gamma_M: float
    ratio_lower: float
    num_nodes: int
    num_lp_solves: int
    num_cuts: int
    wall_time: float | None = None


class OracleRequest(BaseModel):
    instance: InstanceModel
    budget: int = 200_000_000


class OracleResponse(BaseModel):
    z_star: float
    best_sites: list[int]
    evaluations: int
    wall_time: float | None = None


class SweepRequest(BaseModel):
    instance: InstanceModel
    betas: list[float]
    options: SolveOptions = SolveOptions()


class SweepRow(BaseModel):
    beta: float
    z_best: float
    status: str
    num_nodes: int
    num_cuts: dict[str, int]
    best_sites: list[int] | None
    wall_time: float | None = None


class SweepResponse(BaseModel):
    rows: list[SweepRow]


class HealthResponse(BaseModel):
    status: str
    version: str
