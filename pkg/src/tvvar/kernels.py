"""Kernel functions, their moment constants, and local-linear weights.

Only the Epanechnikov kernel ships as a built-in; :class:`KernelSpec` is the
extension point for alternatives. Moment constants are computed by quadrature
rather than hand-derived, so a user-supplied kernel needs nothing beyond its
evaluation function.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DegenerateWindowError

__all__ = [
    "KernelSpec",
    "LocalWeightTable",
    "epanechnikov",
    "EPANECHNIKOV",
    "local_linear_weights",
]


def epanechnikov(u):
    """K(u) = 0.75 (1 - u^2) on [-1, 1], zero outside. Vectorized."""
    u = np.asarray(u, dtype=float)
    return np.maximum(0.75 * (1.0 - u * u), 0.0)


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric density kernel supported on [-1, 1].

    Parameters
    ----------
    name : str
        Identifier used in reports.
    fn : callable
        Vectorized evaluation u -> K(u), zero outside [-1, 1].
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    _moment_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, u):
        return self.fn(u)

    def moment(self, k, squared=False):
        """int u^k K(u) du (or K^2 with ``squared``), absolute error <= 1e-10."""
        key = (k, squared)
        if key not in self._moment_cache:
            if squared:
                integrand = lambda u: u**k * float(self.fn(np.array([u]))[0]) ** 2
            else:
                integrand = lambda u: u**k * float(self.fn(np.array([u]))[0])
            val, _ = quad(integrand, -1.0, 1.0, epsabs=1e-12, limit=200)
            self._moment_cache[key] = val
        return self._moment_cache[key]

    def cb_constant(self):
        """int_0^2 (int K(u) K(u+v) du)^2 dv, stable to 1e-8 under refinement.

        Outer integral by trapezoid with doubling panel counts, inner by
        adaptive quadrature.
        """
        key = "cb"
        if key not in self._moment_cache:

            def inner(v):
                val, _ = quad(
                    lambda u: float(self.fn(np.array([u]))[0])
                    * float(self.fn(np.array([u + v]))[0]),
                    -1.0,
                    1.0 - v,
                    epsabs=1e-12,
                    limit=200,
                )
                return val * val

            prev = None
            n = 500
            while True:
                grid = np.linspace(0.0, 2.0, n + 1)
                est = float(np.trapezoid([inner(v) for v in grid], grid))
                if prev is not None and abs(est - prev) < 1e-8:
                    break
                prev = est
                n *= 2
            self._moment_cache[key] = est
        return self._moment_cache[key]


EPANECHNIKOV = KernelSpec("epanechnikov", epanechnikov)


def kernel_moment(spec, k, squared=False):
    """Functional wrapper around :meth:`KernelSpec.moment`."""
    return spec.moment(k, squared=squared)


def cb_constant(spec):
    """Functional wrapper around :meth:`KernelSpec.cb_constant`."""
    return spec.cb_constant()


@dataclass(frozen=True)
class LocalWeightTable:
    """Local-linear covariance weights at one target point.

    ``weights[t-1]`` is the weight of observation t in the locally weighted
    second-moment sum (1/T) sum_t e_t e_t' w_t(tau).
    """

    tau: float
    h: float
    p_moments: np.ndarray  # P_{h,0..2}(tau), exact finite-sample sums
    weights: np.ndarray  # length T


def _p_moments(spec, tau_points, tau, h):
    u = (tau_points - tau) / h
    k = spec(u) / h  # K_h values
    return np.array([np.mean(k * u**j) for j in range(3)]), u, k


def local_linear_weights(spec, T, tau, h):
    """Per-observation local-linear weights w_t(tau) on the grid tau_t = t/T.

    Raises :class:`DegenerateWindowError` when the effective support holds
    fewer than two points or the normalizing denominator P0 P2 - P1^2
    is numerically zero.
    """
    if not (0.0 < h < 1.0):
        raise ValueError(f"bandwidth must lie in (0, 1), got {h}")
    if T < 2:
        raise ValueError(f"need T >= 2, got {T}")
    tau_points = np.arange(1, T + 1) / T
    n_support = int(np.sum(np.abs(tau_points - tau) <= h))
    if n_support < 2:
        raise DegenerateWindowError(tau, h, n_support)
    p, u, k = _p_moments(spec, tau_points, tau, h)
    denom = p[0] * p[2] - p[1] ** 2
    if denom <= 1e-14:
        raise DegenerateWindowError(tau, h, n_support)
    w = k * (p[2] - u * p[1]) / denom
    return LocalWeightTable(tau=tau, h=h, p_moments=p, weights=w)
