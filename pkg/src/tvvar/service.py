"""HTTP service exposing the estimation pipeline.

Thin orchestration only: every endpoint converts its request into library
calls and flattens the result into the long-format schemas. Data problems map
to 400, numerical failures (singular designs, non-positive-definite
covariances, unstable designs) to 422.
"""

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .data import config_hash
from .diagnostics import bg_lm_test, standardized_innovations
from .errors import DataError, DomainError, NumericalError
from .estimation import ObservedPanel, fit_tvvar, fit_vhat, pointwise_ci
from .irf import structural_irf
from .schemas import (
    BandwidthRequest,
    BandwidthResponse,
    DiagnosticsRequest,
    DiagnosticsResponse,
    EstimateCell,
    FitRequest,
    FitResponse,
    IrfCell,
    IrfRequest,
    IrfResponse,
    SelectLagRequest,
    SelectLagResponse,
    SimulateRequest,
    SimulateResponse,
    StabilityRequest,
    StabilityResponse,
)
from .selection import cv_bandwidth, select_lag
from .simulation import eq_local_deviation, eq_smooth_var2, simulate_panel
from .stability import bootstrap_test, restriction

app = FastAPI(title="tvvar", version=__version__)


@app.exception_handler(DataError)
async def _data_error(request: Request, exc: DataError):
    return JSONResponse(
        status_code=400,
        content={"error": str(exc), "kind": type(exc).__name__, "detail": None},
    )


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(
        status_code=400,
        content={"error": str(exc), "kind": type(exc).__name__, "detail": None},
    )


@app.exception_handler(NumericalError)
async def _numerical_error(request: Request, exc: NumericalError):
    return JSONResponse(
        status_code=422,
        content={"error": str(exc), "kind": type(exc).__name__, "detail": None},
    )


def _to_panel(payload):
    values = np.asarray(payload.rows, dtype=float)
    labels = payload.columns or [f"y{i}" for i in range(values.shape[1])]
    return ObservedPanel(values, presample=payload.presample, labels=tuple(labels))


def _resolve_h(panel, p, h):
    if h is not None:
        return float(h), False
    return float(cv_bandwidth(panel, p).chosen), True


def _grid(grid_size):
    if grid_size is None:
        return None
    return np.linspace(0.0, 1.0, grid_size)


def _hash(req):
    return config_hash(req.model_dump())


@app.get("/health")
async def health():
    return {"status": "ok", "version": __version__}


@app.post("/fit", response_model=FitResponse)
async def fit_endpoint(req: FitRequest):
    panel = _to_panel(req.panel)
    h, was_cv = _resolve_h(panel, req.p, req.h)
    fit = fit_tvvar(panel, req.p, h, grid=_grid(req.grid_size))
    ci = pointwise_ci(fit, fit_vhat(fit), level=req.level) if req.with_se else None

    cells = []
    G, d, m = fit.A_hat.shape
    se = ci["A_se"] if ci is not None else None
    se_O = ci["Omega_se"] if ci is not None else None
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    vech_pos = {(int(rows[order][k]), int(cols[order][k])): k for k in range(len(order))}
    for g in range(G):
        for j in range(m):
            for i in range(d):
                cells.append(EstimateCell(
                    tau=fit.grid[g], quantity="A", row=i, col=j,
                    value=float(fit.A_hat[g, i, j]),
                    se=float(se[g, j * d + i]) if se is not None else None,
                ))
        for i in range(d):
            for j in range(i + 1):
                cells.append(EstimateCell(
                    tau=fit.grid[g], quantity="Omega", row=i, col=j,
                    value=float(fit.Omega_hat[g, i, j]),
                    se=float(se_O[g, vech_pos[(i, j)]]) if se_O is not None else None,
                ))
    return FitResponse(
        p=req.p, h=h, h_was_cv=was_cv, columns=list(panel.labels),
        grid=[float(t) for t in fit.grid], estimates=cells,
        rss=float(fit.rss()), config_hash=_hash(req),
    )


def _irf_cells(grid, surface, se):
    cells = []
    G, J1, d, _ = surface.shape
    for g in range(G):
        for j in range(J1):
            for i in range(d):
                for k in range(d):
                    cells.append(IrfCell(
                        tau=float(grid[g]), horizon=j, row=i, col=k,
                        value=float(surface[g, j, i, k]),
                        se=float(se[g, j, i, k]) if se is not None else None,
                    ))
    return cells


@app.post("/irf", response_model=IrfResponse)
async def irf_endpoint(req: IrfRequest):
    panel = _to_panel(req.panel)
    h, _ = _resolve_h(panel, req.p, req.h)
    fit = fit_tvvar(panel, req.p, h, grid=_grid(req.grid_size))
    vhat = fit_vhat(fit) if req.with_se else None
    irfs = structural_irf(
        fit, scheme=req.scheme, horizons=req.horizons, vhat=vhat,
        with_cov=req.with_se, cumulative=req.cumulative,
    )
    cum = None
    if req.cumulative and irfs.cumulative is not None:
        cum = _irf_cells(irfs.grid, irfs.cumulative, irfs.cumulative_se)
    return IrfResponse(
        scheme=req.scheme, p=req.p, h=h, horizons=req.horizons,
        grid=[float(t) for t in irfs.grid],
        responses=_irf_cells(irfs.grid, irfs.B, irfs.se),
        cumulative=cum, config_hash=_hash(req),
    )


@app.post("/select-lag", response_model=SelectLagResponse)
async def select_lag_endpoint(req: SelectLagRequest):
    panel = _to_panel(req.panel)
    sel = select_lag(panel, P_max=req.max_lag)
    return SelectLagResponse(
        chosen=int(sel.chosen),
        candidates=[int(c) for c in sel.candidates],
        rss=[float(v) for v in sel.rss],
        ic=[float(v) for v in sel.ic],
        penalty=[float(v) for v in sel.penalty],
        h_cv=[float(v) for v in sel.h_cv],
        config_hash=_hash(req),
    )


@app.post("/bandwidth", response_model=BandwidthResponse)
async def bandwidth_endpoint(req: BandwidthRequest):
    panel = _to_panel(req.panel)
    search = cv_bandwidth(panel, req.p, h_grid=req.h_grid)
    return BandwidthResponse(
        chosen=float(search.chosen),
        h_grid=[float(v) for v in search.h_grid],
        cv_scores=[None if not np.isfinite(v) else float(v) for v in search.cv_scores],
        config_hash=_hash(req),
    )


@app.post("/test-stability", response_model=StabilityResponse)
async def stability_endpoint(req: StabilityRequest):
    panel = _to_panel(req.panel)
    h, _ = _resolve_h(panel, req.p, req.h)
    spec = restriction(req.block, panel.d, req.p)
    report = bootstrap_test(
        panel, req.p, h, spec, B=req.B, seed=req.seed, levels=tuple(req.levels)
    )
    return StabilityResponse(
        block=req.block, q_hat=report.q_hat, q_star=report.q_star,
        p_value=report.p_value,
        critical_values={str(k): v for k, v in report.critical_values.items()},
        reject={str(a): report.reject(a) for a in req.levels},
        p=req.p, h=h, B=req.B, seed=req.seed,
        n_skipped=report.n_skipped, config_hash=_hash(req),
    )


@app.post("/simulate", response_model=SimulateResponse)
async def simulate_endpoint(req: SimulateRequest):
    if req.dgp == "smooth":
        spec = eq_smooth_var2()
    else:
        h = req.h if req.h is not None else req.T ** (-1.0 / 5.0)
        spec = eq_local_deviation(req.b, req.T, h)
    panel = simulate_panel(spec, req.T, seed=req.seed)
    return SimulateResponse(
        dgp=req.dgp, T=req.T, seed=req.seed,
        columns=[f"y{i}" for i in range(panel.d)],
        presample=panel.presample,
        rows=[[float(v) for v in row] for row in panel.data],
        config_hash=_hash(req),
    )


@app.post("/diagnostics", response_model=DiagnosticsResponse)
async def diagnostics_endpoint(req: DiagnosticsRequest):
    panel = _to_panel(req.panel)
    h, _ = _resolve_h(panel, req.p, req.h)
    fit = fit_tvvar(panel, req.p, h)
    eps = standardized_innovations(fit)
    stat, p_value, df = bg_lm_test(eps, order=req.order)
    return DiagnosticsResponse(
        statistic=float(stat), p_value=float(p_value), df=int(df),
        order=req.order, config_hash=_hash(req),
    )
