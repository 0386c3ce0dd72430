import numpy as np
import pytest

from tvvar.estimation import ObservedPanel


def stationary_var_panel(seed=0, T=300, d=2, p=1, rho=0.5):
    """Constant-coefficient VAR(p) panel for oracle comparisons."""
    rng = np.random.default_rng(seed)
    A = [np.eye(d) * rho / (j + 1) for j in range(p)]
    x = np.zeros((T + p + 100, d))
    for t in range(p, x.shape[0]):
        x[t] = sum(A[j] @ x[t - 1 - j] for j in range(p)) + rng.standard_normal(d)
    return ObservedPanel(x[100:], presample=p), A


@pytest.fixture
def var1_panel():
    return stationary_var_panel(seed=7, T=300, d=2, p=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
