"""Structural impulse responses and their delta-method covariances.

Identification is either recursive ("short_run": the contemporaneous loading
is the lower Cholesky factor of Omega) or via long-run restrictions (the
cumulative impact matrix B = (I - sum A_i)^{-1} omega is lower triangular).
Analytic gradients of each horizon's response with respect to the coefficient
vector and vech(Omega) are propagated through the joint covariance of the
local-linear estimator to produce pointwise standard errors.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import NotPositiveDefiniteError, SingularLongRunMatrixError
from .linalg import (
    cholesky_lower,
    commutation,
    duplication,
    elimination,
    spectral_radius,
    strict_upper_selector,
)

__all__ = [
    "CompanionForm",
    "IrfSet",
    "build_companion",
    "vma_coefficients",
    "identify_short_run",
    "identify_long_run",
    "gradient_blocks",
    "irf_covariance",
    "structural_irf",
    "cumulative_irf",
]

STABILITY_MARGIN = 1e-10


@dataclass(frozen=True)
class CompanionForm:
    """First-order dp x dp stacking of a VAR(p) coefficient set."""

    phi: np.ndarray
    J_selector: np.ndarray  # d x dp, [I_d, 0]
    radius: float
    stable: bool


def build_companion(A_blocks):
    """Assemble the companion matrix from lag blocks [A_1, ..., A_p]."""
    A_blocks = np.asarray(A_blocks, dtype=float)
    p, d, _ = A_blocks.shape
    phi = np.zeros((d * p, d * p))
    phi[:d, :] = A_blocks.transpose(1, 0, 2).reshape(d, d * p)
    if p > 1:
        phi[d:, : d * (p - 1)] = np.eye(d * (p - 1))
    J = np.hstack([np.eye(d), np.zeros((d, d * (p - 1)))])
    radius = spectral_radius(phi)
    return CompanionForm(phi=phi, J_selector=J, radius=radius, stable=radius < 1.0 - STABILITY_MARGIN)


def vma_coefficients(comp, J):
    """Reduced-form moving-average blocks Psi_0..Psi_J via companion products.

    Uses a running product of the companion matrix, never repeated powering.
    Instability is allowed: finite-horizon coefficients remain well defined.
    """
    d = comp.J_selector.shape[0]
    out = [np.eye(d)]
    power = np.eye(comp.phi.shape[0])
    for _ in range(J):
        power = comp.phi @ power
        out.append(power[:d, :d].copy())
    return out


def identify_short_run(Omega):
    """Lower-triangular contemporaneous loading from the Cholesky of Omega."""
    return cholesky_lower(Omega)


def identify_long_run(A_blocks, Omega, rcond_min=1e-12):
    """Long-run identification: returns (B, omega).

    B is the lower Cholesky factor of Psi Omega Psi' with
    Psi = (I - sum A_i)^{-1}; omega = Psi^{-1} B then satisfies
    omega omega' = Omega.
    """
    A_blocks = np.asarray(A_blocks, dtype=float)
    d = A_blocks.shape[1]
    A1m = np.eye(d) - A_blocks.sum(axis=0)  # I - sum A_i
    sv = np.linalg.svd(A1m, compute_uv=False)
    rcond = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    if rcond < rcond_min:
        raise SingularLongRunMatrixError(rcond=rcond)
    Psi = np.linalg.inv(A1m)
    B = cholesky_lower(Psi @ Omega @ Psi.T)
    omega = A1m @ B
    return B, omega


def _phiT_powers(comp, j):
    """[(Phi')^0, ..., (Phi')^(j-1)] by running products."""
    if j <= 0:
        return []
    out = [np.eye(comp.phi.shape[0])]
    for _ in range(j - 1):
        out.append(comp.phi.T @ out[-1])
    return out


def _pad_lag_selector(d, p):
    """[0_{d^2 p x d}, I_{d^2 p}]: maps vec(A) onto its lag-block part."""
    return np.hstack([np.zeros((d * d * p, d)), np.eye(d * d * p)])


def gradient_blocks(scheme, A_blocks, omega, comp, Psi_list, j, B=None):
    """Gradients (C_j1, C_j2) of vec(B_j) w.r.t. vec(A) and vech(Omega).

    ``Psi_list`` must contain at least Psi_0..Psi_j for the same coefficients.
    Under the long-run scheme ``B`` is the identified long-run impact matrix.
    """
    A_blocks = np.asarray(A_blocks, dtype=float)
    p, d, _ = A_blocks.shape
    Ld = elimination(d)
    Kdd = commutation(d, d)
    N1 = (np.eye(d * d) + Kdd) @ np.kron(omega, np.eye(d))
    pad = _pad_lag_selector(d, p)
    Psi_j = Psi_list[j]

    if scheme == "short_run":
        C2 = np.kron(np.eye(d), Psi_j) @ Ld.T @ np.linalg.inv(Ld @ N1 @ Ld.T)
        if j == 0:
            C1 = np.zeros((d * d, d * d * p + d))
        else:
            phiT = _phiT_powers(comp, j)
            Jsel = comp.J_selector
            S = sum(
                np.kron(Jsel @ phiT[j - 1 - m_], Psi_list[m_]) for m_ in range(j)
            )
            C1 = np.kron(omega.T, np.eye(d)) @ S @ pad
        return C1, C2

    if scheme != "long_run":
        raise ValueError(f"unknown identification scheme: {scheme}")

    if B is None:
        raise ValueError("long-run gradients need the identified impact matrix B")
    Q = strict_upper_selector(d)
    D1 = duplication(d)
    A1m = np.eye(d) - A_blocks.sum(axis=0)
    Ainv = np.linalg.inv(A1m)
    N2 = Q @ np.kron(np.eye(d), Ainv)
    grad_A1 = -np.tile(np.eye(d * d), (1, p))  # d(vec A(1))/d(vec[A_1..A_p])
    D2 = Q @ np.kron(B.T, Ainv) @ grad_A1
    M = np.linalg.inv(N1.T @ N1 + N2.T @ N2)
    IPsi = np.kron(np.eye(d), Psi_j)

    C2 = IPsi @ M @ N1.T @ D1
    via_omega = IPsi @ M @ N2.T @ D2 @ pad
    if j == 0:
        C1 = via_omega
    else:
        phiT = _phiT_powers(comp, j)
        Jsel = comp.J_selector
        S = sum(np.kron(Jsel @ phiT[j - 1 - m_], Psi_list[m_]) for m_ in range(j))
        C1 = np.kron(omega.T, np.eye(d)) @ S @ pad + via_omega
    return C1, C2


def irf_covariance(C1, C2, V_full, T, h):
    """Delta-method covariance of vec(B_j) and per-entry standard errors.

    Returns the symmetrized sandwich [C1, C2] V [C1, C2]' and standard errors
    sqrt(max(diag, 0) / (T h)); negative diagonal entries (possible only
    through rounding) are clipped for the SE extraction.
    """
    C = np.hstack([C1, C2])
    S = C @ V_full @ C.T
    S = 0.5 * (S + S.T)
    se = np.sqrt(np.maximum(np.diag(S), 0.0) / (T * h))
    return S, se


@dataclass
class IrfSet:
    """Structural impulse responses over the grid with optional covariances."""

    scheme: str
    horizons: int
    grid: np.ndarray
    Psi: np.ndarray  # (G, J+1, d, d)
    B: np.ndarray  # (G, J+1, d, d)
    omega: np.ndarray  # (G, d, d)
    se: Optional[np.ndarray] = None  # (G, J+1, d, d)
    cov: Optional[np.ndarray] = None  # (G, J+1, d^2, d^2)
    stable: Optional[np.ndarray] = None  # (G,) companion radius < 1
    valid: Optional[np.ndarray] = None  # (G,) grid point identified (PD Omega)
    long_run_impact: Optional[np.ndarray] = None  # (G, d, d) under long_run
    cumulative: Optional[np.ndarray] = None  # (G, J+1, d, d)
    cumulative_se: Optional[np.ndarray] = None


def structural_irf(fit, scheme="short_run", horizons=20, vhat=None, with_cov=True,
                   cumulative=False, on_not_pd="raise"):
    """Identify and evaluate impulse responses at every grid point of a fit.

    Grid points with a non-positive-definite Omega_hat are refused; unstable
    companion matrices are flagged (and refused for long-run identification).
    With ``on_not_pd="skip"`` a refused grid point is marked invalid (NaN
    entries, ``valid[g] = False``) instead of aborting the whole evaluation.
    """
    from .estimation import fit_vhat

    G = len(fit.grid)
    d, p = fit.d, fit.p
    J = horizons
    if with_cov and vhat is None:
        vhat = fit_vhat(fit)

    Psi = np.empty((G, J + 1, d, d))
    Bjs = np.empty((G, J + 1, d, d))
    omega_path = np.empty((G, d, d))
    se = np.empty((G, J + 1, d, d)) if with_cov else None
    cov = np.empty((G, J + 1, d * d, d * d)) if with_cov else None
    stable = np.empty(G, dtype=bool)
    lr_impact = np.empty((G, d, d)) if scheme == "long_run" else None
    cum = np.empty((G, J + 1, d, d)) if cumulative else None
    cum_se = np.empty((G, J + 1, d, d)) if (cumulative and with_cov) else None

    valid = np.ones(G, dtype=bool)

    def _refuse(g, exc):
        if on_not_pd == "raise":
            raise exc
        valid[g] = False
        Psi[g] = np.nan
        Bjs[g] = np.nan
        omega_path[g] = np.nan
        if se is not None:
            se[g] = np.nan
        if cov is not None:
            cov[g] = np.nan
        if lr_impact is not None:
            lr_impact[g] = np.nan
        if cum is not None:
            cum[g] = np.nan
        if cum_se is not None:
            cum_se[g] = np.nan

    for g in range(G):
        _, lags = fit.coefficient_blocks(g)
        comp = build_companion(lags)
        stable[g] = comp.stable
        if not fit.omega_pd[g]:
            _refuse(g, NotPositiveDefiniteError(
                -1, f"Omega_hat not positive definite at tau={fit.grid[g]:.4g}"
            ))
            continue
        Psi_list = vma_coefficients(comp, J)
        if scheme == "short_run":
            om = identify_short_run(fit.Omega_hat[g])
            Bmat = None
        else:
            if not comp.stable:
                _refuse(g, SingularLongRunMatrixError(tau=float(fit.grid[g])))
                continue
            Bmat, om = identify_long_run(lags, fit.Omega_hat[g])
            lr_impact[g] = Bmat
        omega_path[g] = om
        csum1 = np.zeros((d * d, d * p * d + d))
        csum2 = np.zeros((d * d, d * (d + 1) // 2))
        for j in range(J + 1):
            Psi[g, j] = Psi_list[j]
            Bjs[g, j] = Psi_list[j] @ om
            if cumulative:
                cum[g, j] = Bjs[g, : j + 1].sum(axis=0)
            if with_cov:
                C1, C2 = gradient_blocks(
                    scheme, lags, om, comp, Psi_list, j, B=Bmat
                )
                S, s = irf_covariance(C1, C2, vhat.full[g], fit.T, fit.h)
                cov[g, j] = S
                se[g, j] = s.reshape(d, d, order="F")
                if cumulative:
                    csum1 += C1
                    csum2 += C2
                    _, cs = irf_covariance(csum1, csum2, vhat.full[g], fit.T, fit.h)
                    cum_se[g, j] = cs.reshape(d, d, order="F")

    return IrfSet(
        scheme=scheme,
        horizons=J,
        grid=np.asarray(fit.grid),
        Psi=Psi,
        B=Bjs,
        omega=omega_path,
        se=se,
        cov=cov,
        stable=stable,
        valid=valid,
        long_run_impact=lr_impact,
        cumulative=cum,
        cumulative_se=cum_se,
    )


def cumulative_irf(irfs, upto=None):
    """Running sums of the responses up to each horizon (no covariances).

    For cumulative standard errors request ``cumulative=True`` from
    :func:`structural_irf`, which sums the gradient blocks before sandwiching.
    """
    J = irfs.horizons if upto is None else upto
    return np.cumsum(irfs.B[:, : J + 1], axis=1)
