import numpy as np
import pytest

from tvvar.errors import DegenerateWindowError
from tvvar.kernels import (
    EPANECHNIKOV,
    cb_constant,
    epanechnikov,
    kernel_moment,
    local_linear_weights,
)


class TestEpanechnikov:
    def test_values(self):
        assert epanechnikov(np.array([0.0]))[0] == pytest.approx(0.75)
        assert epanechnikov(np.array([1.0]))[0] == 0.0
        assert epanechnikov(np.array([2.0]))[0] == 0.0
        assert epanechnikov(np.array([-0.5]))[0] == pytest.approx(0.75 * 0.75)

    def test_symmetry(self, rng):
        u = rng.uniform(-2, 2, size=200)
        assert np.allclose(epanechnikov(u), epanechnikov(-u))


class TestMoments:
    """Frozen quadrature values, independently derived in closed form."""

    def test_unit_mass(self):
        assert kernel_moment(EPANECHNIKOV, 0) == pytest.approx(1.0, abs=1e-10)

    def test_second_moment(self):
        # int u^2 K = 1/5
        assert kernel_moment(EPANECHNIKOV, 2) == pytest.approx(0.2, abs=1e-10)

    def test_squared_mass(self):
        # int K^2 = 3/5
        assert kernel_moment(EPANECHNIKOV, 0, squared=True) == pytest.approx(0.6, abs=1e-10)

    def test_squared_second_moment(self):
        # int u^2 K^2 = 3/35
        assert kernel_moment(EPANECHNIKOV, 2, squared=True) == pytest.approx(
            3.0 / 35.0, abs=1e-10
        )

    def test_odd_moments_vanish(self):
        assert kernel_moment(EPANECHNIKOV, 1) == pytest.approx(0.0, abs=1e-10)
        assert kernel_moment(EPANECHNIKOV, 1, squared=True) == pytest.approx(0.0, abs=1e-10)

    def test_moment_cache_hits(self):
        first = EPANECHNIKOV.moment(2)
        assert EPANECHNIKOV.moment(2) is first or EPANECHNIKOV.moment(2) == first


class TestConvolutionConstant:
    def test_frozen_value(self):
        # double integral of [int K(v)K(v+w) dv]^2 dw = 167/770 for this kernel
        assert cb_constant(EPANECHNIKOV) == pytest.approx(167.0 / 770.0, abs=1e-7)


class TestLocalLinearWeights:
    def test_weights_average_to_one(self):
        # (1/T) sum_t w_t(tau) = 1 exactly by construction
        table = local_linear_weights(EPANECHNIKOV, 200, 0.5, 0.2)
        assert np.mean(table.weights) == pytest.approx(1.0, abs=1e-12)

    def test_first_moment_orthogonality(self):
        # (1/T) sum_t w_t(tau) u_t = 0: the linear term is projected out
        T, tau, h = 200, 0.37, 0.15
        table = local_linear_weights(EPANECHNIKOV, T, tau, h)
        u = (np.arange(1, T + 1) / T - tau) / h
        assert np.mean(table.weights * u) == pytest.approx(0.0, abs=1e-10)

    def test_mirror_symmetry(self):
        # weights at tau and 1+1/T-tau are mirror images on the grid t/T
        T, h = 100, 0.2
        left = local_linear_weights(EPANECHNIKOV, T, 0.3, h).weights
        right = local_linear_weights(EPANECHNIKOV, T, 1.0 + 1.0 / T - 0.3, h).weights
        assert np.allclose(left, right[::-1], atol=1e-10)

    def test_interior_weights_positive_at_center(self):
        table = local_linear_weights(EPANECHNIKOV, 500, 0.5, 0.1)
        center = np.argmax(table.weights)
        assert abs((center + 1) / 500 - 0.5) < 0.02

    def test_degenerate_window(self):
        with pytest.raises(DegenerateWindowError):
            local_linear_weights(EPANECHNIKOV, 100, 0.5, 0.004)

    def test_p_moments_match_direct_sums(self):
        T, tau, h = 150, 0.6, 0.25
        table = local_linear_weights(EPANECHNIKOV, T, tau, h)
        taus = np.arange(1, T + 1) / T
        u = (taus - tau) / h
        k = epanechnikov(u) / h
        for j in range(3):
            assert table.p_moments[j] == pytest.approx(np.mean(k * u**j), abs=1e-12)
