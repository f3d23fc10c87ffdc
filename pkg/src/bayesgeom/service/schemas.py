"""Request/response models for the HTTP service; the CLI validates its JSON
config through the same RunConfig union."""

from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..estimators import SUITE_TARGETS

__all__ = [
    "OutputSpec",
    "GridAxis",
    "McmcSpec",
    "BetaBernoulliSpec",
    "BetaBinomialConfig",
    "NigConfig",
    "ExpfamConfig",
    "EstimateConfig",
    "TraceConfig",
    "SweepConfig",
    "RegressionConfig",
    "RunConfig",
    "RunRequest",
    "TableArtifact",
    "RunResponse",
]


class OutputSpec(BaseModel):
    path: str | None = None
    format: Literal["json", "csv"] = "json"


class GridAxis(BaseModel):
    parameter: str
    min: float
    max: float
    points: int = Field(ge=1)
    scale: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check_bounds(self):
        if not self.min < self.max and self.points > 1:
            raise ValueError(f"axis {self.parameter!r} needs min < max")
        if self.scale == "log" and self.min <= 0:
            raise ValueError(f"log axis {self.parameter!r} needs min > 0")
        return self

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.min]
        if self.scale == "log":
            return list(np.geomspace(self.min, self.max, self.points))
        return list(np.linspace(self.min, self.max, self.points))


class McmcSpec(BaseModel):
    """Monte Carlo settings; the seed has no default on purpose."""

    draws: int = Field(ge=1)
    seed: int
    burn_in: float = Field(default=0.1, ge=0.0, lt=1.0)
    method: Literal["direct", "rw_metropolis"] = "direct"
    thin: int = Field(default=1, ge=1)


class BetaBernoulliSpec(BaseModel):
    a: float
    b: float
    n: int = Field(default=0, ge=0)
    n1: int = Field(default=0, ge=0)

    @field_validator("a", "b")
    @classmethod
    def _check_half(cls, v, info):
        if not v > 0.5:
            raise ValueError(
                f"{info.field_name} = {v} is not allowed: the Beta prior's "
                "L2 norm exists only for a, b > 1/2 (B(2a-1, 2b-1) must be "
                "finite)"
            )
        return v

    @model_validator(mode="after")
    def _check_counts(self):
        if self.n1 > self.n:
            raise ValueError(f"n1 = {self.n1} exceeds n = {self.n}")
        return self


class BetaBinomialConfig(BaseModel):
    command: Literal["beta-binomial"]
    model: BetaBernoulliSpec
    output: OutputSpec | None = None


class NigPriorSpec(BaseModel):
    mu0: float
    eta0: float = Field(gt=0)
    nu0: float = Field(gt=0)
    sigma0_sq: float = Field(gt=0)


class NigDataSpec(BaseModel):
    n: int = Field(ge=1)
    ybar: float
    ss: float = Field(ge=0)


class NigConfig(BaseModel):
    command: Literal["nig"]
    prior: NigPriorSpec
    data: NigDataSpec | None = None
    output: OutputSpec | None = None


class ExpfamConfig(BaseModel):
    command: Literal["expfam"]
    family: str
    family_params: dict = Field(default_factory=dict)
    tau: list[float]
    n0: float
    data: list[float]
    output: OutputSpec | None = None


class EstimateConfig(BaseModel):
    command: Literal["estimate"]
    model: BetaBernoulliSpec
    targets: list[str] | None = None
    prior2: BetaBernoulliSpec | None = None
    mcmc: McmcSpec
    output: OutputSpec | None = None

    @field_validator("targets")
    @classmethod
    def _check_targets(cls, v):
        if v is not None:
            unknown = [t for t in v if t not in SUITE_TARGETS]
            if unknown:
                raise ValueError(
                    f"unknown targets {unknown}; available: {list(SUITE_TARGETS)}"
                )
        return v


class TraceModelSpec(BaseModel):
    settings: list[BetaBernoulliSpec]
    n: int = Field(ge=0)
    n1: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_counts(self):
        if self.n1 > self.n:
            raise ValueError(f"n1 = {self.n1} exceeds n = {self.n}")
        if not self.settings:
            raise ValueError("at least one prior setting required")
        return self


class TraceConfig(BaseModel):
    command: Literal["trace"]
    model: TraceModelSpec
    estimators: list[Literal["harmonic", "stable"]] = Field(
        default_factory=lambda: ["harmonic", "stable"]
    )
    mcmc: McmcSpec
    stride: int = Field(default=1, ge=1)
    output: OutputSpec | None = None


class SweepModelSpec(BaseModel):
    n: int = Field(ge=0)
    n1: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_counts(self):
        if self.n1 > self.n:
            raise ValueError(f"n1 = {self.n1} exceeds n = {self.n}")
        return self


_SWEEP_METRICS = (
    "kappa_prior_lik",
    "kappa_prior_post",
    "norm_prior",
    "norm_posterior",
)


class SweepConfig(BaseModel):
    command: Literal["sweep"]
    model: SweepModelSpec
    grid: list[GridAxis]
    metrics: list[str] = Field(default_factory=lambda: list(_SWEEP_METRICS))
    output: OutputSpec | None = None

    @model_validator(mode="after")
    def _check_grid(self):
        params = [axis.parameter for axis in self.grid]
        if sorted(params) != ["a", "b"]:
            raise ValueError(
                f"sweep grid must have exactly the axes 'a' and 'b', got {params}"
            )
        for axis in self.grid:
            if not axis.min > 0.5:
                raise ValueError(
                    f"axis {axis.parameter!r} starts at {axis.min}: Beta prior "
                    "norms exist only for hyperparameters above 1/2"
                )
        unknown = [m for m in self.metrics if m not in _SWEEP_METRICS]
        if unknown:
            raise ValueError(
                f"unknown sweep metrics {unknown}; available: {list(_SWEEP_METRICS)}"
            )
        return self


class SyntheticSpec(BaseModel):
    n: int = Field(default=97, ge=3)
    p: int = Field(default=8, ge=1)
    seed: int = 0


class RegressionDataSpec(BaseModel):
    path: str | None = None
    synthetic: SyntheticSpec | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.path is None) == (self.synthetic is None):
            raise ValueError("provide exactly one of 'path' or 'synthetic'")
        return self


class RegressionConfig(BaseModel):
    command: Literal["regression"]
    data: RegressionDataSpec
    lambda_grid: GridAxis | list[float]
    kinds: list[Literal["gaussian", "laplace"]] = Field(
        default_factory=lambda: ["gaussian", "laplace"]
    )
    centers: list[float] | None = None
    mcmc: McmcSpec
    output: OutputSpec | None = None

    @model_validator(mode="after")
    def _check_grid(self):
        if isinstance(self.lambda_grid, GridAxis):
            if self.lambda_grid.parameter != "lambda_sq":
                raise ValueError(
                    "regression grid axis must be the parameter 'lambda_sq', "
                    f"got {self.lambda_grid.parameter!r}"
                )
            if self.lambda_grid.min <= 0:
                raise ValueError("lambda_sq grid must be positive")
        else:
            if not self.lambda_grid:
                raise ValueError("lambda grid is empty")
            if any(not (isinstance(v, (int, float)) and v > 0) for v in self.lambda_grid):
                raise ValueError("lambda_sq values must be positive numbers")
        return self

    def lambda_values(self) -> list[float]:
        if isinstance(self.lambda_grid, GridAxis):
            return self.lambda_grid.values()
        return [float(v) for v in self.lambda_grid]


RunConfig = Annotated[
    Union[
        BetaBinomialConfig,
        NigConfig,
        ExpfamConfig,
        EstimateConfig,
        TraceConfig,
        SweepConfig,
        RegressionConfig,
    ],
    Field(discriminator="command"),
]


class RunRequest(BaseModel):
    """Body of POST /run."""

    config: RunConfig


class TableArtifact(BaseModel):
    name: str
    columns: list[str]
    csv: str


class RunResponse(BaseModel):
    command: str
    report: dict | None = None
    table: TableArtifact | None = None
