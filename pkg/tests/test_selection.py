import math

import numpy as np
import pytest

from tvvar.errors import DomainError
from tvvar.estimation import ObservedPanel
from tvvar.kernels import EPANECHNIKOV
from tvvar.selection import (
    _loo_score,
    cv_bandwidth,
    default_h_grid,
    penalty_chi,
    select_lag,
)

from conftest import stationary_var_panel


class TestPenalty:
    def test_worked_example(self):
        # max{0.3^4, log(400)/120} * log(log(120))
        expected = max(0.3**4, math.log(400) / 120.0) * math.log(math.log(120.0))
        assert penalty_chi(400, 0.3) == pytest.approx(expected, rel=1e-12)
        assert penalty_chi(400, 0.3) == pytest.approx(0.07818894335619307, rel=1e-12)

    def test_h4_branch_dominates_for_large_h(self):
        assert penalty_chi(400, 0.9) > penalty_chi(400, 0.45)
        assert penalty_chi(400, 0.9) == pytest.approx(
            0.9**4 * math.log(math.log(400 * 0.9)), rel=1e-12
        )

    def test_domain_error(self):
        with pytest.raises(DomainError):
            penalty_chi(4, 0.5)  # Th = 2 <= e


class TestDefaultGrid:
    def test_rate_and_range(self):
        grid = default_h_grid(400)
        rate = 400 ** (-0.2)
        assert grid[0] == pytest.approx(0.4 * rate)
        assert grid[-1] == pytest.approx(1.8 * rate)
        assert len(grid) == 8
        assert np.all(np.diff(grid) > 0)


class TestCvBandwidth:
    def test_loo_score_matches_bruteforce(self):
        from tvvar.estimation import _gram_rhs

        panel, _ = stationary_var_panel(seed=14, T=60, d=2, p=1)
        p, h = 1, 0.4
        y, Z, taus = panel.design(p)
        T, m = Z.shape
        sse = 0.0
        for t in range(T):
            keep = np.arange(T) != t
            gram, rhs = _gram_rhs(
                y[keep], Z[keep], taus[keep], taus[t : t + 1], h, EPANECHNIKOV
            )
            coef = np.linalg.solve(gram[0], rhs[0])
            sse += np.sum((y[t] - Z[t] @ coef[:m]) ** 2)
        assert _loo_score(panel, p, h, EPANECHNIKOV) == pytest.approx(sse, rel=1e-10)

    def test_leave_one_out_exceeds_insample(self):
        # the LOO residual at tau_t is larger than the full-fit residual
        panel, _ = stationary_var_panel(seed=15, T=150, d=2, p=1)
        from tvvar.estimation import fit_tvvar

        h = 0.25
        fit = fit_tvvar(panel, 1, h)
        insample = float(np.sum(fit.residuals**2))
        assert _loo_score(panel, 1, h, EPANECHNIKOV) > insample

    def test_too_small_bandwidth_marked_invalid(self):
        panel, _ = stationary_var_panel(seed=16, T=100, d=2, p=1)
        search = cv_bandwidth(panel, 1, h_grid=[0.004, 0.3, 0.4])
        assert np.isinf(search.cv_scores[0])
        assert search.chosen in (0.3, 0.4)

    def test_chosen_attains_minimum(self):
        panel, _ = stationary_var_panel(seed=17, T=200, d=2, p=1)
        search = cv_bandwidth(panel, 1)
        finite = np.isfinite(search.cv_scores)
        assert search.chosen == search.h_grid[np.argmin(np.where(finite, search.cv_scores, np.inf))]

    def test_deterministic(self):
        panel, _ = stationary_var_panel(seed=18, T=150, d=2, p=1)
        a = cv_bandwidth(panel, 2)
        b = cv_bandwidth(panel, 2)
        assert a.chosen == b.chosen
        assert np.array_equal(a.cv_scores, b.cv_scores)


class TestSelectLag:
    def test_recovers_var1(self):
        panel, _ = stationary_var_panel(seed=19, T=400, d=2, p=1, rho=0.6)
        assert select_lag(panel, P_max=4).chosen == 1

    def test_white_noise_prefers_smallest(self):
        rng = np.random.default_rng(20)
        hits = 0
        for r in range(10):
            panel = ObservedPanel(rng.standard_normal((200, 2)), presample=0)
            hits += select_lag(panel, P_max=4).chosen == 1
        assert hits >= 8

    def test_rss_monotone_in_p(self):
        panel, _ = stationary_var_panel(seed=21, T=250, d=2, p=1)
        sel = select_lag(panel, P_max=5)
        # nested regressors on a common sample: RSS can only go down,
        # except that per-p bandwidth re-selection may wiggle it slightly
        h_equal = sel.h_cv[:-1] == sel.h_cv[1:]
        drops = np.diff(sel.rss)
        assert np.all(drops[h_equal] <= 1e-10)

    def test_ic_decomposition_identity(self):
        panel, _ = stationary_var_panel(seed=22, T=200, d=2, p=1)
        sel = select_lag(panel, P_max=4)
        assert np.allclose(sel.ic, np.log(sel.rss) + sel.candidates * sel.penalty)
        assert sel.penalty[0] == sel.penalty[-1]  # one chi_T for all candidates

    def test_chosen_attains_minimum_with_tie_toward_small_p(self):
        panel, _ = stationary_var_panel(seed=23, T=200, d=2, p=1)
        sel = select_lag(panel, P_max=4)
        assert sel.chosen == sel.candidates[np.argmin(sel.ic)]
