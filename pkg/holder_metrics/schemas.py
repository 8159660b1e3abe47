# Report models for analysis results

from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

Uncertainty = Union[float, Literal["exact"]]


class Measured(BaseModel):
    value: Optional[float] = Field(
        None,
        description="Measured or fitted value. Null when the quantity does not exist (e.g. no α)."
    )
    uncertainty: Uncertainty = Field(
        "exact",
        description="Additive uncertainty of the value, or 'exact' for closed forms."
    )


class AnnulusRow(BaseModel):
    k: int
    radius_gap: float = Field(..., description="1 − |z| on the annulus, i.e. 2^−k")
    max_spherical_derivative: float
    max_growth_excess: Optional[float] = None


class HolderEstimate(BaseModel):
    alpha_hat: Optional[float] = Field(
        None,
        description="Fitted Hölder exponent in (0, 1]; null means no α was found."
    )
    alpha_uncertainty: float = 0.0
    raw_slope: float = Field(..., description="Unclamped envelope slope of the fit")
    drift: float = Field(0.0, description="Local α at the shallow end of the fit window minus the deep end")
    K_hat: Optional[Measured] = None
    M_hat: Measured
    C_hat: Dict[str, Measured] = Field(default_factory=dict)
    alpha_growth: Optional[float] = None
    alpha_growth_uncertainty: Optional[float] = None
    residual: float = 0.0
    n_samples: int = 0
    depth: int
    annuli: List[AnnulusRow] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class RadiusRatio(BaseModel):
    r: float
    distance: float = Field(..., description="h_D(w₀, C_r), an upper bound from ray sampling")
    ratio: float = Field(..., description="h_D(w₀, C_r) / log r")
    w_r: Tuple[float, float] = Field(..., description="Crossing point realizing the minimum")
    chordal_bound_ok: bool


class MeansRow(BaseModel):
    p: float
    k: int
    r: float
    mean: float
    error: float


class MembershipRow(BaseModel):
    p: float
    verdict: Literal["inside", "outside", "inconclusive"]


class HardyEstimate(BaseModel):
    h_hat: Optional[float] = Field(
        None,
        description="Liminf surrogate of h_D(w₀, C_r)/log r; null when flagged non-finite."
    )
    finite: bool = True
    uncertainty: float = 0.0
    ratios: List[RadiusRatio] = Field(default_factory=list)
    means: List[MeansRow] = Field(default_factory=list)
    memberships: List[MembershipRow] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class HardyBoundVerdict(BaseModel):
    passed: Optional[bool] = None
    skipped: bool = False
    h_hat: Optional[float] = None
    bound: Optional[float] = Field(None, description="1/α̂")
    uncertainty: float = 0.0
    slack: Optional[float] = None
    note: Optional[str] = None


class ReductionReport(BaseModel):
    r: Measured
    base_point: Tuple[float, float]
    anchor: Tuple[float, float]
    ratio_min: Measured
    ratio_max: Measured
    envelope_ok: bool
    boundary_image_max: Measured = Field(..., description="max |g| over the boundary net")
    density_min: Measured
    density_pass: bool
    qh_c1: Optional[float] = None
    qh_c1_uncertainty: Optional[float] = Field(None, description="Change of c1 between the two deepest grids")
    qh_c2: Optional[float] = None
    qh_c2_uncertainty: Optional[float] = Field(None, description="Change of c2 between the two deepest grids")
    qh_c2_by_depth: List[float] = Field(default_factory=list)
    qh_verdict: Optional[bool] = None
    equivalence: Optional[bool] = None
    notes: List[str] = Field(default_factory=list)


class InvariantResult(BaseModel):
    name: str
    passed: bool
    slack: Optional[float] = None
    uncertainty: Uncertainty = "exact"
    detail: Optional[str] = None


class RunParameters(BaseModel):
    command: str
    domain: str
    depth: int
    samples: int
    seed: int
    mesh: float
    qh_depth: int
    n_rays: int
    bisection_depth: int
    hardy_ceiling: float
    tol: Optional[float] = None
    format: Literal["json", "csv"] = "json"


class AnalysisReport(BaseModel):
    domain: str
    params: RunParameters
    holder: Optional[HolderEstimate] = None
    hardy: Optional[HardyEstimate] = None
    hardy_bound: Optional[HardyBoundVerdict] = None
    reduction: Optional[ReductionReport] = None
    invariants: List[InvariantResult] = Field(default_factory=list)
    version: str
