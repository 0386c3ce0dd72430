import numpy as np
import pytest
from scipy.stats import kstest

from tvvar.diagnostics import bg_lm_test, standardized_innovations
from tvvar.estimation import fit_tvvar

from conftest import stationary_var_panel


class TestStandardizedInnovations:
    def test_whitens_residuals(self):
        panel, _ = stationary_var_panel(seed=40, T=600, d=2, p=1)
        fit = fit_tvvar(panel, 1, 0.3)
        eps = standardized_innovations(fit)
        assert eps.shape == fit.residuals.shape
        cov = np.cov(eps.T)
        assert np.allclose(cov, np.eye(2), atol=0.15)

    def test_consistent_with_loading(self):
        panel, _ = stationary_var_panel(seed=41, T=300, d=2, p=1)
        fit = fit_tvvar(panel, 1, 0.35)
        eps = standardized_innovations(fit)
        L = np.linalg.cholesky(fit.Omega_hat)
        back = np.einsum("tij,tj->ti", L, eps)
        assert np.allclose(back, fit.residuals, atol=1e-10)


class TestBgLm:
    def test_perfectly_correlated_residuals_rejected(self):
        rng = np.random.default_rng(42)
        # unit-root innovations: sample first-order autocorrelation -> 1
        eps = np.cumsum(rng.standard_normal((400, 2)), axis=0)
        stat, p, df = bg_lm_test(eps)
        assert p < 1e-6
        assert df == 4

    def test_iid_residuals_have_uniform_pvalues(self):
        rng = np.random.default_rng(43)
        pvals = [bg_lm_test(rng.standard_normal((500, 2)))[1] for _ in range(200)]
        assert kstest(pvals, "uniform").pvalue > 0.01

    def test_ar_residuals_detected(self):
        rng = np.random.default_rng(44)
        n = 500
        e = np.zeros((n, 2))
        for t in range(1, n):
            e[t] = 0.5 * e[t - 1] + rng.standard_normal(2)
        stat, p, _ = bg_lm_test(e)
        assert p < 1e-4

    def test_only_first_order_supported(self):
        with pytest.raises(NotImplementedError):
            bg_lm_test(np.zeros((50, 2)), order=2)


def test_three_variable_workflow_smoke():
    """End-to-end: select lag, fit, diagnose, impulse responses, stability."""
    from tvvar.irf import structural_irf
    from tvvar.selection import cv_bandwidth, select_lag
    from tvvar.simulation import DgpSpec, simulate_panel
    from tvvar.stability import bootstrap_test, restriction

    rot = np.array(
        [[0.5, 0.1, 0.0], [0.0, 0.4, 0.1], [0.1, 0.0, 0.3]]
    )
    spec = DgpSpec(
        d=3, p=1,
        intercept=lambda tau: np.array([0.1, 0.0, -0.1]),
        lag_blocks=lambda tau: (rot * (1.0 - 0.3 * tau))[None],
        loading=lambda tau: np.eye(3),
        burn_in=100,
    )
    panel = simulate_panel(spec, 246, seed=5)
    sel = select_lag(panel, P_max=3)
    assert sel.chosen in (1, 2, 3)
    h = cv_bandwidth(panel, sel.chosen).chosen
    fit = fit_tvvar(panel, sel.chosen, h)
    eps = standardized_innovations(fit)
    _, p_bg, df = bg_lm_test(eps)
    assert df == 9
    assert 0.0 <= p_bg <= 1.0
    irfs = structural_irf(fit, horizons=8)
    assert irfs.B.shape[2:] == (3, 3)
    rep = bootstrap_test(panel, sel.chosen, h, restriction("A1", 3, sel.chosen), B=19, seed=3)
    assert 0.05 <= rep.p_value <= 1.0
