"""Request/response models for the HTTP service.

Panels travel as row-major lists of floats; all estimate surfaces come back
in long format (tau / horizon / row / col / value / se) so clients can write
them straight to CSV. Every response carries the seed (where applicable) and
a hash of the request configuration for provenance.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator


class PanelPayload(BaseModel):
    """A multivariate time series, oldest row first."""

    rows: List[List[float]]
    columns: Optional[List[str]] = None
    presample: int = Field(0, ge=0)

    @field_validator("rows")
    @classmethod
    def _rectangular(cls, rows):
        if not rows:
            raise ValueError("panel has no rows")
        width = len(rows[0])
        if width == 0 or any(len(r) != width for r in rows):
            raise ValueError("panel rows must be non-empty and equal-width")
        return rows


class EstimateCell(BaseModel):
    """One entry of a long-format estimate surface."""

    tau: float
    quantity: str
    row: int
    col: int
    value: float
    se: Optional[float] = None


class FitRequest(BaseModel):
    panel: PanelPayload
    p: int = Field(..., ge=1)
    h: Optional[float] = Field(None, gt=0, le=1)  # None -> cross-validated
    grid_size: Optional[int] = Field(None, ge=2)  # None -> sample points
    level: float = Field(0.95, gt=0, lt=1)
    with_se: bool = True


class FitResponse(BaseModel):
    p: int
    h: float
    h_was_cv: bool
    columns: List[str]
    grid: List[float]
    estimates: List[EstimateCell]
    rss: float
    config_hash: str


class IrfCell(BaseModel):
    tau: float
    horizon: int
    row: int
    col: int
    value: float
    se: Optional[float] = None


class IrfRequest(BaseModel):
    panel: PanelPayload
    p: int = Field(..., ge=1)
    h: Optional[float] = Field(None, gt=0, le=1)
    scheme: Literal["short_run", "long_run"] = "short_run"
    horizons: int = Field(20, ge=0)
    grid_size: Optional[int] = Field(None, ge=2)
    with_se: bool = True
    cumulative: bool = False


class IrfResponse(BaseModel):
    scheme: str
    p: int
    h: float
    horizons: int
    grid: List[float]
    responses: List[IrfCell]
    cumulative: Optional[List[IrfCell]] = None
    config_hash: str


class SelectLagRequest(BaseModel):
    panel: PanelPayload
    max_lag: int = Field(6, ge=1)


class SelectLagResponse(BaseModel):
    chosen: int
    candidates: List[int]
    rss: List[float]
    ic: List[float]
    penalty: List[float]
    h_cv: List[float]
    config_hash: str


class BandwidthRequest(BaseModel):
    panel: PanelPayload
    p: int = Field(..., ge=1)
    h_grid: Optional[List[float]] = None


class BandwidthResponse(BaseModel):
    chosen: float
    h_grid: List[float]
    cv_scores: List[Optional[float]]  # null marks invalid candidates
    config_hash: str


class StabilityRequest(BaseModel):
    panel: PanelPayload
    p: int = Field(..., ge=1)
    h: Optional[float] = Field(None, gt=0, le=1)
    block: str = "all"  # "all" | "intercept" | "lags" | "A1".."Ap"
    B: int = Field(199, ge=1)
    seed: int = 0
    levels: List[float] = Field(default_factory=lambda: [0.01, 0.05, 0.10])


class StabilityResponse(BaseModel):
    block: str
    q_hat: float
    q_star: float
    p_value: float
    critical_values: Dict[str, float]
    reject: Dict[str, bool]
    p: int
    h: float
    B: int
    seed: int
    n_skipped: int
    config_hash: str


class SimulateRequest(BaseModel):
    dgp: Literal["smooth", "local"] = "smooth"
    T: int = Field(..., ge=20)
    seed: int = 0
    b: float = 0.0  # deviation scale for the "local" design
    h: Optional[float] = Field(None, gt=0, le=1)  # rate anchor for "local"


class SimulateResponse(BaseModel):
    dgp: str
    T: int
    seed: int
    columns: List[str]
    presample: int
    rows: List[List[float]]
    config_hash: str


class DiagnosticsRequest(BaseModel):
    panel: PanelPayload
    p: int = Field(..., ge=1)
    h: Optional[float] = Field(None, gt=0, le=1)
    order: int = Field(1, ge=1)


class DiagnosticsResponse(BaseModel):
    statistic: float
    p_value: float
    df: int
    order: int
    config_hash: str


class ErrorBody(BaseModel):
    error: str
    kind: str
    detail: Optional[dict] = None
