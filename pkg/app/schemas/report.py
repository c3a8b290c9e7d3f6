from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

Number = Union[float, str]


class ReportBase(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SymbolReport(ReportBase):
    min_modulus: float
    point: list[str]
    component: int
    direction: list[float]
    grid_points: int
    sphere_samples: int
    margin: float
    passed: bool
    order: int
    sampled: bool = True  # certified on samples only


class PointRank(ReportBase):
    x: list[str]
    component: int
    r: int
    q: int
    chosen_indices: list[list[int]]


class AnalyzeReport(ReportBase):
    k_star: int
    grid: int
    points: list[PointRank]
    histogram: dict[str, int]
    constant_rank: bool
    constant_order: bool


class SobolevReport(ReportBase):
    k: int
    gram: list[list[Number]]
    constant: Number
    constant_float: float
    ratios: list[float]
    certificate: dict[str, Union[int, float, str]]
    cover_equivalence: Optional[dict[str, float]] = None


class PatchReport(ReportBase):
    component: int
    center: list[str]
    half_width: float
    span: list[list[int]]
    margin: float
    condition: float


class CoverReport(ReportBase):
    patches: list[PatchReport]
    margins: list[float]
    method_agreement: Optional[float] = None
    partition_error: float
    residual_sup: float
    triangle_ok: bool
    symbol_min: float


class StageReport(ReportBase):
    stage: int
    m: int
    q: int
    span: list[list[int]]
    v_count: int
    f_next_count: int
    g_terms: Optional[int] = None
    g_sampled: bool = False
    fit_model: Optional[str] = None
    fit_residual: Optional[float] = None
    zero_set_change: Optional[float] = None


class StratificationReport(ReportBase):
    stages: list[StageReport]
    q: int
    residual_sup: Optional[float] = None
    constant_form: Optional[str] = None
    notes: list[str] = []


class WitnessReport(ReportBase):
    n_max: int
    centers: dict[str, str]
    half_widths: dict[str, float]
    jets: dict[str, list[float]]
    refutation: Optional[dict[str, Union[int, float, bool]]] = None


class Offender(ReportBase):
    x: list[str]
    component: int
    basis_index: int
    residual: float


class VerificationReport(ReportBase):
    residual_sup: float
    tol: float
    exact: bool
    worst: list[Offender]
    symbol: SymbolReport
    passed: bool


class PipelineReport(ReportBase):
    dimension: int
    components: int
    mode: Literal["exact", "float"]
    N: int
    k_star: int
    norm_constant: float
    q: int
    elliptic_order: int
    path: Literal["constant-rank", "stratified"]
    fallback_used: bool = False
    operator_file: Optional[str] = None
    operator: str
    residual_sup: float
    exact_residual_zero: bool = False
    symbol_min: float
    constant_form: bool = False
    cover: Optional[CoverReport] = None
    stratification: Optional[StratificationReport] = None
    timings: Optional[dict[str, float]] = None
