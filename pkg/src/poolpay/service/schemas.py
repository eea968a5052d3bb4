"""Request and response models shared by the HTTP service and the CLI.

Rules travel as tagged objects, e.g. {"kind": "pplns", "n": 125}; whatever
the optimize endpoint emits is accepted verbatim by evaluate, simulate and
check. Responses echo their inputs and the package version so a saved
report is self-describing.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, TypeAdapter

from .. import allocation, core


class SoloSpec(BaseModel):
    kind: Literal["solo"] = "solo"


class PplnsSpec(BaseModel):
    kind: Literal["pplns"] = "pplns"
    n: int = Field(ge=1)


class GeometricSpec(BaseModel):
    kind: Literal["geometric"] = "geometric"
    c: float = Field(gt=0.0)
    r: float = Field(gt=0.0, lt=1.0)


class CustomSpec(BaseModel):
    kind: Literal["custom"] = "custom"
    weights: list[float] = Field(min_length=1)


RuleSpec = Annotated[
    Union[SoloSpec, PplnsSpec, GeometricSpec, CustomSpec],
    Field(discriminator="kind"),
]


class ProportionalSpec(BaseModel):
    kind: Literal["proportional"] = "proportional"


SchemeSpec = Annotated[
    Union[SoloSpec, PplnsSpec, GeometricSpec, CustomSpec, ProportionalSpec],
    Field(discriminator="kind"),
]

_RULE_ADAPTER: TypeAdapter = TypeAdapter(RuleSpec)


class PowerUtilitySpec(BaseModel):
    kind: Literal["power"] = "power"
    alpha: float = Field(gt=0.0, le=1.0)


class LogShiftedUtilitySpec(BaseModel):
    kind: Literal["log_shifted"] = "log_shifted"


UtilitySpec = Annotated[
    Union[PowerUtilitySpec, LogShiftedUtilitySpec],
    Field(discriminator="kind"),
]


def rule_from_spec(spec: BaseModel) -> allocation.AllocationRule:
    return allocation.rule_from_dict(spec.model_dump())


def rule_to_spec(rule: allocation.AllocationRule):
    return _RULE_ADAPTER.validate_python(rule.to_dict())


def utility_from_spec(spec: BaseModel) -> core.UtilityFunction:
    if isinstance(spec, PowerUtilitySpec):
        return core.PowerUtility(alpha=spec.alpha)
    if isinstance(spec, LogShiftedUtilitySpec):
        return core.LogShiftedUtility()
    raise core.ParameterError(f"unsupported utility spec {spec!r}")


class _EnvFields(BaseModel):
    delta: float = Field(default=0.999, gt=0.0, lt=1.0)
    block_reward: float = Field(default=1000.0, gt=0.0)
    share_prob: float = Field(default=0.001, gt=0.0, le=1.0)

    def pool_params(self) -> core.PoolParams:
        return core.PoolParams(
            p=self.share_prob, block_reward=self.block_reward, delta=self.delta
        )


class OptimizeRequest(_EnvFields):
    alpha: float = Field(gt=0.0, le=1.0)


class SoloSection(BaseModel):
    rule: RuleSpec
    utility: float


class PplnsSection(BaseModel):
    rule: RuleSpec
    n_real: float
    n_int: int
    utility: float


class GeometricSection(BaseModel):
    rule: RuleSpec
    utility: float


class OptimizeResponse(BaseModel):
    version: str
    inputs: OptimizeRequest
    solo: SoloSection
    pplns: PplnsSection
    geometric: GeometricSection


class EvaluateRequest(_EnvFields):
    rule: RuleSpec
    utility: UtilitySpec
    eps: float = Field(default=1e-12, gt=0.0)


class EvaluateResponse(BaseModel):
    version: str
    inputs: EvaluateRequest
    mass: float
    truncation_depth: int
    utility: float


class SimulateRequest(_EnvFields):
    rule: SchemeSpec
    utility: UtilitySpec
    num_shares: int = Field(default=1_000_000, ge=1)
    trials: int = Field(default=20, ge=1)
    seed: int = Field(default=12345, ge=0)
    report_k: int = Field(default=64, ge=0)
    steady_window: float = Field(default=0.5, gt=0.0, lt=1.0)


class PerKRow(BaseModel):
    k: int
    mean: float
    se: float


class ConvergenceModel(BaseModel):
    converged: bool
    steady_state_utility: float
    drift: float
    drift_se: float
    half_gap: float
    mean_reward_per_share: float
    balance_ok: bool


class SimulateResponse(BaseModel):
    version: str
    inputs: SimulateRequest
    seed: int
    per_k: list[PerKRow]
    steady_mean: float
    steady_se: float
    shares_counted: int
    report: ConvergenceModel


class SweepRequest(_EnvFields):
    alphas: list[float] = Field(
        default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], min_length=1
    )
    simulate: bool = False
    num_shares: int = Field(default=120_000, ge=1)
    trials: int = Field(default=4, ge=1)
    seed: int = Field(default=12345, ge=0)


class SweepRow(BaseModel):
    alpha: float
    scheme: str
    param: str
    analytic_utility: float
    sim_utility: float | None = None
    sim_se: float | None = None


class SweepResponse(BaseModel):
    version: str
    inputs: SweepRequest
    seed: int
    rows: list[SweepRow]


class PayoffRequest(_EnvFields):
    alpha: float = Field(gt=0.0, lt=1.0)
    n: int | None = Field(default=None, ge=1)
    max_offset: int = Field(default=32, ge=1)


class PayoffRow(BaseModel):
    offset: int
    geometric_weight: float
    pplns_weight: float


class PayoffResponse(BaseModel):
    version: str
    inputs: PayoffRequest
    n: int
    geometric_rule: RuleSpec
    rows: list[PayoffRow]


class CheckRequest(_EnvFields):
    rule: RuleSpec
    utility: UtilitySpec = Field(default=PowerUtilitySpec(alpha=0.5))
    eps: float = Field(default=1e-6, gt=0.0)


class CheckItem(BaseModel):
    name: str
    ok: bool
    detail: str


class CheckResponse(BaseModel):
    version: str
    inputs: CheckRequest
    ok: bool
    checks: list[CheckItem]


class HealthResponse(BaseModel):
    status: str
    version: str
