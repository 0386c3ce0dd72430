"""Residual diagnostics for a fitted time-varying VAR."""

import numpy as np
from scipy.stats import chi2

from .errors import NotPositiveDefiniteError

__all__ = ["standardized_innovations", "bg_lm_test"]


def standardized_innovations(fit):
    """eps_t = omega(tau_t)^{-1} eta_t using the recursive (Cholesky) loading."""
    sample_omega = fit.Omega_hat
    if len(fit.grid) != fit.T:
        from .estimation import fit_covariance

        sample_omega = fit_covariance(fit.residuals, fit.h, fit.taus, fit.kernel)
    try:
        L = np.linalg.cholesky(sample_omega)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(-1, "Omega_hat not PD at some sample point")
    return np.linalg.solve(L, fit.residuals[:, :, None])[:, :, 0]


def bg_lm_test(eps, order=1):
    """LM score test of first-order serial correlation in a vector series.

    Auxiliary regression of eps_t on eps_{t-1} (no higher orders are needed
    for the order-1 check); the score statistic is referred to a chi-square
    with d^2 degrees of freedom. Returns (statistic, p_value, df).
    """
    if order != 1:
        raise NotImplementedError("only the first-order check is implemented")
    eps = np.asarray(eps, dtype=float)
    n, d = eps.shape
    e = eps - eps.mean(axis=0)
    c0 = e.T @ e / n
    c1 = e[1:].T @ e[:-1] / n
    w = np.linalg.solve(np.kron(c0, c0), c1.reshape(-1, order="F"))
    stat = float(n * c1.reshape(-1, order="F") @ w)
    df = d * d
    return stat, float(chi2.sf(stat, df)), df
