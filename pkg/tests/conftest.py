import numpy as np
import pytest

from mirropt.cfom import CoefficientSchedule


def random_schedule(N, rng, scale=1.0):
    """Arbitrary dense schedule with the b(0,0) = -1 convention."""
    a = np.zeros((N + 1, N + 1))
    b = np.zeros((N + 1, N + 1))
    b[0, 0] = -1.0
    for k in range(1, N + 1):
        a[k, :k] = scale * rng.standard_normal(k)
        b[k, : k + 1] = scale * rng.standard_normal(k + 1)
    return CoefficientSchedule(N=N, a=a, b=b)


def random_valid_schedule(N, rng, scale=1.0, convex=False):
    """Schedule satisfying the row-sum condition sum_i b(k,i) = 0.

    With convex=True the b rows are built from nonnegative hull weights,
    so every x_k stays a convex combination of the mirrored points.
    """
    a = np.zeros((N + 1, N + 1))
    b = np.zeros((N + 1, N + 1))
    b[0, 0] = -1.0
    for k in range(1, N + 1):
        a[k, :k] = scale * rng.standard_normal(k)
    if convex:
        w_prev = np.zeros(N + 1)
        w_prev[0] = 1.0
        for k in range(1, N + 1):
            w = np.zeros(N + 1)
            w[: k + 1] = rng.dirichlet(np.ones(k + 1))
            b[k, : k + 1] = (w_prev - w)[: k + 1]
            w_prev = w
    else:
        for k in range(1, N + 1):
            row = scale * rng.standard_normal(k + 1)
            row[-1] -= row.sum()
            b[k, : k + 1] = row
    return CoefficientSchedule(N=N, a=a, b=b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
