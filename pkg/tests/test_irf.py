import numpy as np
import pytest

from tvvar.errors import SingularLongRunMatrixError
from tvvar.estimation import fit_tvvar, fit_vhat
from tvvar.irf import (
    build_companion,
    cumulative_irf,
    gradient_blocks,
    identify_long_run,
    identify_short_run,
    structural_irf,
    vma_coefficients,
)
from tvvar.linalg import commutation, duplication, elimination, vec, vech

from conftest import stationary_var_panel


A1 = np.array([[0.5, 0.1], [-0.2, 0.4]])
A2 = np.array([[0.1, 0.0], [0.05, -0.1]])
OMEGA = np.array([[1.0, 0.3], [0.3, 0.8]])


class TestCompanion:
    def test_var1_is_own_companion(self):
        comp = build_companion(A1[None])
        assert np.allclose(comp.phi, A1)
        assert comp.stable

    def test_var2_block_layout(self):
        comp = build_companion(np.stack([A1, A2]))
        assert np.allclose(comp.phi[:2, :2], A1)
        assert np.allclose(comp.phi[:2, 2:], A2)
        assert np.allclose(comp.phi[2:, :2], np.eye(2))
        assert np.allclose(comp.phi[2:, 2:], 0.0)

    def test_unstable_flagged(self):
        comp = build_companion(np.array([[[1.05, 0.0], [0.0, 0.2]]]))
        assert not comp.stable
        assert comp.radius == pytest.approx(1.05)


class TestVma:
    def test_matches_recursion_oracle(self):
        # Psi_j = sum_k A_k Psi_{j-k}, Psi_0 = I
        lags = np.stack([A1, A2])
        psis = vma_coefficients(build_companion(lags), 8)
        ref = [np.eye(2)]
        for j in range(1, 9):
            s = np.zeros((2, 2))
            for k in (1, 2):
                if j - k >= 0:
                    s += lags[k - 1] @ ref[j - k]
            ref.append(s)
        for j in range(9):
            assert np.allclose(psis[j], ref[j], atol=1e-12)

    def test_matches_unit_shock_simulation(self):
        lags = np.stack([A1, A2])
        psis = vma_coefficients(build_companion(lags), 6)
        for col in range(2):
            shock = np.eye(2)[col]
            x = [shock, lags[0] @ shock]
            for t in range(2, 7):
                x.append(lags[0] @ x[t - 1] + lags[1] @ x[t - 2])
            for j in range(7):
                assert np.allclose(psis[j][:, col], x[j], atol=1e-12)


class TestIdentification:
    def test_short_run_factor(self):
        om = identify_short_run(OMEGA)
        assert np.allclose(om @ om.T, OMEGA, atol=1e-12)
        assert np.allclose(np.triu(om, 1), 0.0)
        assert np.all(np.diag(om) > 0)

    def test_long_run_invariants(self):
        B, om = identify_long_run(np.stack([A1, A2]), OMEGA)
        # omega still factors the innovation covariance
        assert np.allclose(om @ om.T, OMEGA, atol=1e-12)
        # cumulative impact Psi(1) omega equals the lower-triangular B
        psi1 = np.linalg.inv(np.eye(2) - A1 - A2)
        assert np.allclose(psi1 @ om, B, atol=1e-12)
        assert np.allclose(np.triu(B, 1), 0.0)

    def test_long_run_rejects_unit_root(self):
        with pytest.raises(SingularLongRunMatrixError):
            identify_long_run(np.array([[[1.0, 0.0], [0.0, 0.5]]]), OMEGA)


def _theta_to_irf(theta, d, p, j, scheme):
    """Map (vec A_lags..., vech Omega) -> vec B_j; reference for gradients."""
    npar = d * d * p
    lags = np.stack(
        [theta[k * d * d:(k + 1) * d * d].reshape(d, d, order="F") for k in range(p)]
    )
    from tvvar.linalg import unvech

    omega_mat = unvech(theta[npar:])
    psis = vma_coefficients(build_companion(lags), j)
    if scheme == "short_run":
        om = identify_short_run(omega_mat)
    else:
        _, om = identify_long_run(lags, omega_mat)
    return vec(psis[j] @ om)


@pytest.mark.parametrize("scheme", ["short_run", "long_run"])
@pytest.mark.parametrize("j", [0, 1, 3])
def test_gradient_blocks_match_finite_differences(scheme, j):
    d, p = 2, 2
    lags = np.stack([A1, A2])
    comp = build_companion(lags)
    psis = vma_coefficients(comp, j)
    if scheme == "short_run":
        om, B = identify_short_run(OMEGA), None
    else:
        B, om = identify_long_run(lags, OMEGA)
    C1, C2 = gradient_blocks(scheme, lags, om, comp, psis, j, B=B)

    theta0 = np.concatenate([vec(A1), vec(A2), vech(OMEGA)])
    eps = 1e-6
    num = np.empty((d * d, len(theta0)))
    for k in range(len(theta0)):
        up, dn = theta0.copy(), theta0.copy()
        up[k] += eps
        dn[k] -= eps
        num[:, k] = (
            _theta_to_irf(up, d, p, j, scheme) - _theta_to_irf(dn, d, p, j, scheme)
        ) / (2 * eps)
    # C1 covers [vec a, vec A_1..A_p]; the intercept column block is zero
    analytic = np.hstack([C1[:, d:], C2])
    assert np.allclose(analytic, num, atol=5e-6)
    assert np.allclose(C1[:, :d], 0.0)


class TestStructuralIrf:
    def test_surface_shapes_and_identity_at_zero(self, var1_panel):
        panel, _ = var1_panel
        fit = fit_tvvar(panel, 1, 0.4)
        irfs = structural_irf(fit, horizons=6)
        G = len(fit.grid)
        assert irfs.B.shape == (G, 7, 2, 2)
        # horizon-0 response is the impact matrix omega itself
        assert np.allclose(irfs.B[:, 0], irfs.omega, atol=1e-12)
        assert np.allclose(np.triu(irfs.B[:, 0], 1), 0.0, atol=1e-12)

    def test_se_positive_and_scale_with_T(self):
        meds = []
        for T in (200, 800):
            panel, _ = stationary_var_panel(seed=21, T=T, d=2, p=1)
            fit = fit_tvvar(panel, 1, 0.35)
            irfs = structural_irf(fit, horizons=4)
            assert np.all(irfs.se[:, :, np.tril_indices(2)[0], np.tril_indices(2)[1]] >= 0)
            meds.append(np.median(irfs.se))
        assert meds[1] < meds[0]

    def test_long_run_sets_impact(self, var1_panel):
        panel, _ = var1_panel
        fit = fit_tvvar(panel, 1, 0.4)
        irfs = structural_irf(fit, scheme="long_run", horizons=4)
        assert irfs.long_run_impact is not None
        assert np.allclose(np.triu(irfs.long_run_impact, 1), 0.0, atol=1e-12)

    def test_cumulative_is_partial_sum(self, var1_panel):
        panel, _ = var1_panel
        fit = fit_tvvar(panel, 1, 0.4)
        irfs = structural_irf(fit, horizons=5, cumulative=True)
        assert np.allclose(irfs.cumulative, np.cumsum(irfs.B, axis=1), atol=1e-12)

    def test_cumulative_irf_helper(self, var1_panel):
        panel, _ = var1_panel
        fit = fit_tvvar(panel, 1, 0.4)
        irfs = structural_irf(fit, horizons=5)
        cum = cumulative_irf(irfs)
        assert np.allclose(cum, np.cumsum(irfs.B, axis=1), atol=1e-12)
        assert np.allclose(cumulative_irf(irfs, upto=2), np.cumsum(irfs.B[:, :3], axis=1))


def test_gradient_dimension_conventions():
    # spot-check the commutation/duplication plumbing used by the gradients
    d = 3
    K = commutation(d, d)
    D = duplication(d)
    L = elimination(d)
    s = np.arange(1, 10).reshape(3, 3)
    s = (s + s.T) / 2.0
    assert np.allclose(K @ vec(s), vec(s))  # symmetric fixed point
    assert np.allclose(D @ L @ vec(s), vec(s))
