"""Local-linear estimation of a time-varying VAR.

The coefficient path A(tau) = [a(tau), A_1(tau), ..., A_p(tau)] and the
innovation covariance Omega(tau) are estimated by kernel-weighted least
squares on the rescaled-time grid tau_t = t/T. All grid points are fitted in
one batched pass: kernel-weighted Gram matrices are built with dense matrix
products and the per-point normal equations are solved with stacked LAPACK
calls, which is what makes the Monte Carlo harness feasible.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DataError, SingularDesignError
from .kernels import EPANECHNIKOV, KernelSpec

__all__ = [
    "ObservedPanel",
    "TvVarFit",
    "VhatPath",
    "fit_tvvar",
    "fit_coefficients",
    "compute_residuals",
    "fit_covariance",
    "fit_sigma",
    "fit_vhat",
    "pointwise_ci",
    "vbeta_path",
]

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class ObservedPanel:
    """A d-variate series with optional pre-sample initialization rows.

    ``data`` is ordered oldest-first with shape (presample + T, d). The first
    ``presample`` rows are initial conditions only; the remaining T rows are
    the estimation sample with rescaled time tau_t = t/T.
    """

    data: np.ndarray
    presample: int = 0
    labels: Optional[tuple] = None

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if not np.all(np.isfinite(data)):
            raise DataError("panel contains non-finite values")
        object.__setattr__(self, "data", data)
        if self.presample < 0 or self.presample >= data.shape[0]:
            raise DataError(f"invalid presample row count {self.presample}")
        if self.labels is not None and len(self.labels) != data.shape[1]:
            raise DataError("label count does not match series count")

    @property
    def d(self):
        return self.data.shape[1]

    @property
    def T(self):
        return self.data.shape[0] - self.presample

    def design(self, p, align_to=None):
        """Regression arrays (y, Z, tau) for lag order p.

        When fewer than p pre-sample rows are available the missing initial
        conditions are consumed from the start of the sample and T shrinks.
        ``align_to`` forces the consumption of a larger prefix so that
        candidate lag orders share one effective sample.
        """
        need = max(p, align_to or 0)
        consume = max(need - self.presample, 0)
        n_eff = self.T - consume
        if n_eff < p + 2:
            raise DataError(f"sample too short for lag {p} (effective T={n_eff})")
        start = self.presample + consume  # first regression row in data
        y = self.data[start:]
        m = self.d * p + 1
        Z = np.empty((n_eff, m))
        Z[:, 0] = 1.0
        for j in range(1, p + 1):
            Z[:, 1 + (j - 1) * self.d : 1 + j * self.d] = self.data[start - j : start - j + n_eff]
        tau = np.arange(1, n_eff + 1) / n_eff
        return y, Z, tau


def _kernel_weights(kernel, taus, grid, h):
    """K_h values and scaled distances for every (grid point, observation)."""
    U = (taus[None, :] - np.asarray(grid)[:, None]) / h
    Kh = kernel(U) / h
    return U, Kh


def _gram_rhs(y, Z, taus, grid, h, kernel, UK=None):
    """Local-linear normal-equation pieces at every grid point.

    Returns gram (G, 2m, 2m) and rhs (G, 2m, d) built from three kernel-
    weighted matrix products; this is the single hot spot of the package.
    ``UK`` optionally supplies precomputed (U, Kh) kernel matrices.
    """
    T, m = Z.shape
    d = y.shape[1]
    G = len(grid)
    U, Kh = UK if UK is not None else _kernel_weights(kernel, taus, grid, h)
    W1 = Kh * U
    W2 = W1 * U
    ZZ = (Z[:, :, None] * Z[:, None, :]).reshape(T, m * m)
    ZX = (Z[:, :, None] * y[:, None, :]).reshape(T, m * d)

    gram = np.empty((G, 2 * m, 2 * m))
    gram[:, :m, :m] = (Kh @ ZZ).reshape(G, m, m)
    gram[:, :m, m:] = (W1 @ ZZ).reshape(G, m, m)
    gram[:, m:, :m] = gram[:, :m, m:].transpose(0, 2, 1)
    gram[:, m:, m:] = (W2 @ ZZ).reshape(G, m, m)
    rhs = np.empty((G, 2 * m, d))
    rhs[:, :m, :] = (Kh @ ZX).reshape(G, m, d)
    rhs[:, m:, :] = (W1 @ ZX).reshape(G, m, d)
    return gram, rhs


def _rcond_sym(gram):
    """Reciprocal condition numbers of stacked symmetric matrices."""
    eig = np.linalg.eigvalsh(gram)
    amax = np.max(np.abs(eig), axis=1)
    amin = np.min(np.abs(eig), axis=1)
    return np.where(amax > 0, amin / np.where(amax > 0, amax, 1.0), 0.0)


def _batched_local_fit(y, Z, taus, grid, h, kernel, rcond_min=RCOND_MIN, UK=None):
    """Solve the local-linear normal equations at every grid point at once.

    Returns the level block (G, d, m), the scaled derivative block h*A'(tau),
    and the reciprocal condition number of each local Gram matrix.
    """
    m = Z.shape[1]
    d = y.shape[1]
    gram, rhs = _gram_rhs(y, Z, taus, grid, h, kernel, UK=UK)
    rcond = _rcond_sym(gram)
    bad = np.flatnonzero(rcond < rcond_min)
    if bad.size:
        g = int(bad[0])
        raise SingularDesignError(float(np.asarray(grid)[g]), float(rcond[g]))
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        raise SingularDesignError(float(np.asarray(grid)[0]), 0.0)
    A_hat = coef[:, :m, :].transpose(0, 2, 1)
    A_deriv = coef[:, m:, :].transpose(0, 2, 1)
    return A_hat, A_deriv, rcond


def _local_linear_weight_matrix(U, Kh):
    """Covariance weights w_t(tau) for every grid row of a kernel matrix."""
    P0 = Kh.mean(axis=1)
    P1 = (Kh * U).mean(axis=1)
    P2 = (Kh * U * U).mean(axis=1)
    denom = P0 * P2 - P1 * P1
    if np.any(denom <= 1e-14):
        from .errors import DegenerateWindowError

        g = int(np.argmin(denom))
        raise DegenerateWindowError(float("nan"), float("nan"), 0)
    return Kh * (P2[:, None] - U * P1[:, None]) / denom[:, None]


@dataclass
class TvVarFit:
    """Fitted time-varying VAR on the sample-point grid.

    ``A_hat[g]`` is the d x (dp+1) block [a, A_1, ..., A_p] at grid[g];
    ``A_deriv_scaled`` holds the first-derivative block times h.
    """

    p: int
    h: float
    grid: np.ndarray
    A_hat: np.ndarray  # (G, d, dp+1)
    A_deriv_scaled: np.ndarray  # (G, d, dp+1)
    Omega_hat: np.ndarray  # (G, d, d)
    Sigma_hat: np.ndarray  # (G, m, m)
    residuals: np.ndarray  # (T, d)
    omega_pd: np.ndarray  # (G,) bool, Omega_hat positive definite
    rcond: np.ndarray  # (G,)
    kernel: KernelSpec = EPANECHNIKOV
    y: np.ndarray = field(default=None, repr=False)
    Z: np.ndarray = field(default=None, repr=False)
    taus: np.ndarray = field(default=None, repr=False)

    @property
    def d(self):
        return self.A_hat.shape[1]

    @property
    def T(self):
        return self.residuals.shape[0]

    @property
    def m(self):
        return self.A_hat.shape[2]

    def coefficient_blocks(self, g):
        """Intercept and lag blocks (a, [A_1..A_p]) at grid index g."""
        A = self.A_hat[g]
        a = A[:, 0]
        lags = A[:, 1:].reshape(self.d, self.p, self.d).transpose(1, 0, 2)
        return a, lags

    def rss(self):
        """(1/T) sum_t eta_t' eta_t."""
        return float(np.sum(self.residuals**2) / self.T)


class LocalWeights:
    """Data-independent kernel pieces for one (T, h) geometry.

    Building these once and reusing them across bootstrap replicates (which
    share the sample layout) removes a third of the per-replicate cost.
    """

    def __init__(self, kernel, taus, h, grid=None):
        grid = taus if grid is None else np.asarray(grid, dtype=float)
        self.taus = taus
        self.grid = grid
        self.h = h
        self.U, self.Kh = _kernel_weights(kernel, taus, grid, h)
        self.W = _local_linear_weight_matrix(self.U, self.Kh)
        self.ksum = self.Kh.sum(axis=1)


def fit_tvvar(panel, p, h, kernel=EPANECHNIKOV, grid=None, align_to=None, weights=None):
    """Estimate the full TV-VAR at the sample points (and optional extra grid).

    Residuals always come from fits at the sample points tau_t; when ``grid``
    is given, coefficients and covariances are re-estimated there as well and
    the returned fit is indexed by that grid. ``weights`` may carry a
    precomputed :class:`LocalWeights` for the sample-point geometry.
    """
    y, Z, taus = panel.design(p, align_to=align_to)
    eval_grid = taus if grid is None else np.asarray(grid, dtype=float)

    if weights is not None and grid is None and len(weights.taus) == len(taus):
        lw = weights
    else:
        lw = LocalWeights(kernel, taus, h, grid=eval_grid if grid is not None else None)

    sample_UK = (lw.U, lw.Kh) if grid is None else None
    A_s, A1_s, rcond_s = _batched_local_fit(y, Z, taus, taus, h, kernel, UK=sample_UK)
    residuals = y - np.einsum("tdm,tm->td", A_s, Z)

    if grid is None:
        A_hat, A_deriv, rcond = A_s, A1_s, rcond_s
    else:
        A_hat, A_deriv, rcond = _batched_local_fit(
            y, Z, taus, eval_grid, h, kernel, UK=(lw.U, lw.Kh)
        )

    Kh, W = lw.Kh, lw.W
    d = y.shape[1]
    EE = (residuals[:, :, None] * residuals[:, None, :]).reshape(len(y), d * d)
    Omega = (W @ EE).reshape(len(eval_grid), d, d) / len(y)
    Omega = 0.5 * (Omega + Omega.transpose(0, 2, 1))
    omega_pd = np.linalg.eigvalsh(Omega)[:, 0] > 0.0

    m = Z.shape[1]
    ZZ = (Z[:, :, None] * Z[:, None, :]).reshape(len(y), m * m)
    Sigma = (Kh @ ZZ).reshape(len(eval_grid), m, m) / lw.ksum[:, None, None]
    Sigma = 0.5 * (Sigma + Sigma.transpose(0, 2, 1))

    return TvVarFit(
        p=p,
        h=h,
        grid=eval_grid,
        A_hat=A_hat,
        A_deriv_scaled=A_deriv,
        Omega_hat=Omega,
        Sigma_hat=Sigma,
        residuals=residuals,
        omega_pd=omega_pd,
        rcond=rcond,
        kernel=kernel,
        y=y,
        Z=Z,
        taus=taus,
    )


def fit_coefficients(panel, p, h, grid=None, kernel=EPANECHNIKOV):
    """Coefficient and scaled-derivative paths at the requested grid."""
    y, Z, taus = panel.design(p)
    eval_grid = taus if grid is None else np.asarray(grid, dtype=float)
    A_hat, A_deriv, _ = _batched_local_fit(y, Z, taus, eval_grid, h, kernel)
    return A_hat, A_deriv


def compute_residuals(panel, p, A_at_sample):
    """eta_t = x_t - A(tau_t) z_{t-1} given coefficients at every sample point."""
    y, Z, _ = panel.design(p)
    return y - np.einsum("tdm,tm->td", A_at_sample, Z)


def fit_covariance(residuals, h, grid, kernel=EPANECHNIKOV, sample_taus=None):
    """Local-linear weighted covariance path of a residual matrix."""
    residuals = np.asarray(residuals, dtype=float)
    T, d = residuals.shape
    taus = np.arange(1, T + 1) / T if sample_taus is None else np.asarray(sample_taus)
    U, Kh = _kernel_weights(kernel, taus, np.asarray(grid, dtype=float), h)
    W = _local_linear_weight_matrix(U, Kh)
    EE = (residuals[:, :, None] * residuals[:, None, :]).reshape(T, d * d)
    Omega = (W @ EE).reshape(len(np.asarray(grid)), d, d) / T
    return 0.5 * (Omega + Omega.transpose(0, 2, 1))


def fit_sigma(panel, p, h, grid=None, kernel=EPANECHNIKOV):
    """Kernel-normalized second moment of the regressor vector z_{t-1}."""
    y, Z, taus = panel.design(p)
    eval_grid = taus if grid is None else np.asarray(grid, dtype=float)
    _, Kh = _kernel_weights(kernel, taus, eval_grid, h)
    norm = Kh.sum(axis=1)
    if np.any(norm <= 0):
        from .errors import DegenerateWindowError

        g = int(np.argmin(norm))
        raise DegenerateWindowError(float(eval_grid[g]), h, 0)
    m = Z.shape[1]
    ZZ = (Z[:, :, None] * Z[:, None, :]).reshape(len(y), m * m)
    Sigma = (Kh @ ZZ).reshape(len(eval_grid), m, m) / norm[:, None, None]
    return 0.5 * (Sigma + Sigma.transpose(0, 2, 1))


def _batched_kron(A, B):
    """Stacked Kronecker products: (G,a,b) x (G,c,e) -> (G,ac,be)."""
    G, a, b = A.shape
    _, c, e = B.shape
    return np.einsum("gab,gce->gacbe", A, B).reshape(G, a * c, b * e)


@dataclass
class VhatPath:
    """Joint covariance of (vec A_hat, vech Omega_hat) at every grid point."""

    V11: np.ndarray  # (G, md, md)
    V21: np.ndarray  # (G, D, md)
    V22: np.ndarray  # (G, D, D)
    full: np.ndarray  # (G, md+D, md+D), symmetrized
    sigma_inv: np.ndarray  # (G, m, m)


def fit_vhat(fit, kernel=None):
    """Plug-in estimate of the joint asymptotic covariance at each grid point.

    Blocks: V11 = v0 Sigma^-1 (x) Omega; V21 couples vech(ee') with the
    regressor scores through squared kernel weights; V22 is the centered
    second moment of vech(ee').
    """
    kernel = kernel or fit.kernel
    d, m, T, h = fit.d, fit.m, fit.T, fit.h
    grid = fit.grid
    v0 = kernel.moment(0, squared=True)
    try:
        sigma_inv = np.linalg.inv(fit.Sigma_hat)
    except np.linalg.LinAlgError:
        raise SingularDesignError(float(grid[0]), 0.0)

    V11 = v0 * _batched_kron(sigma_inv, fit.Omega_hat)

    E = fit.residuals
    _, Kh = _kernel_weights(kernel, fit.taus, grid, h)
    Ksq = Kh * Kh
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    Vh = (E[:, rows[order]] * E[:, cols[order]])  # (T, D) vech(e e') rows
    ZE = (fit.Z[:, :, None] * E[:, None, :]).reshape(T, m * d)  # kron(z, e) rows

    V21_raw = np.einsum("gt,ta,tb->gab", Ksq, Vh, ZE) * (h / T)
    sig_inv_I = _batched_kron(sigma_inv, np.broadcast_to(np.eye(d), (len(grid), d, d)))
    V21 = V21_raw @ sig_inv_I

    D = d * (d + 1) // 2
    vech_omega = np.stack(
        [fit.Omega_hat[:, rows[order][k], cols[order][k]] for k in range(D)], axis=1
    )
    V22 = np.einsum("gt,ta,tb->gab", Ksq, Vh, Vh) * (h / T)
    V22 = V22 - v0 * vech_omega[:, :, None] * vech_omega[:, None, :]

    q = m * d + D
    full = np.empty((len(grid), q, q))
    full[:, : m * d, : m * d] = V11
    full[:, m * d :, : m * d] = V21
    full[:, : m * d, m * d :] = V21.transpose(0, 2, 1)
    full[:, m * d :, m * d :] = V22
    full = 0.5 * (full + full.transpose(0, 2, 1))
    return VhatPath(V11=V11, V21=V21, V22=V22, full=full, sigma_inv=sigma_inv)


def vbeta_path(fit):
    """Sigma^-1 (x) Omega at every grid point (covariance of vec A_hat)."""
    sigma_inv = np.linalg.inv(fit.Sigma_hat)
    return _batched_kron(sigma_inv, fit.Omega_hat)


def pointwise_ci(fit, vhat, level=0.95):
    """Pointwise confidence bands for vec(A_hat) and vech(Omega_hat).

    The h^2 smoothing-bias term is deliberately not subtracted (undersmoothing
    convention); plug-in second derivatives are available from
    ``A_deriv_scaled`` for diagnostics.
    """
    from scipy.stats import norm

    z = norm.ppf(0.5 + level / 2.0) if level > 0 else 0.0
    scale = fit.T * fit.h
    d, m = fit.d, fit.m
    G = len(fit.grid)

    # a refused (non-PD Omega) grid point can carry negative variance entries;
    # report NaN there instead of warning
    with np.errstate(invalid="ignore"):
        se_A = np.sqrt(np.diagonal(vhat.V11, axis1=1, axis2=2) / scale)  # (G, md)
    A_flat = fit.A_hat.transpose(0, 2, 1).reshape(G, m * d)  # vec(A) column-major
    se_O = np.sqrt(np.maximum(np.diagonal(vhat.V22, axis1=1, axis2=2), 0.0) / scale)
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    O_flat = fit.Omega_hat[:, rows[order], cols[order]]

    return {
        "A": (A_flat - z * se_A, A_flat + z * se_A),
        "A_se": se_A,
        "Omega": (O_flat - z * se_O, O_flat + z * se_O),
        "Omega_se": se_O,
    }
