import numpy as np
import pytest

from mirropt.objectives import (
    DenseQuadratic,
    DiagQuadratic,
    LogSumExp,
    objective_from_descriptor,
    smoothness_constant,
)
from mirropt.ot import OTDualObjective, OTInstance
from mirropt.spaces import bregman, finite_difference_gradient, lp_norm


def test_value_examples():
    f = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0])
    assert f.value(np.array([1.0, 1.0])) == pytest.approx(2.5, abs=1e-14)
    lse = LogSumExp(r=1.0, n=2)
    assert lse.value(np.zeros(2)) == pytest.approx(np.log(2.0), abs=1e-14)
    dq = DenseQuadratic(A=[[2.0, 1.0], [1.0, 2.0]], b=[0.0, 0.0])
    assert dq.value(np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-14)


def test_grad_examples():
    f = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0])
    assert np.allclose(f.grad(np.array([1.0, 1.0])), [1.0, 4.0])
    lse = LogSumExp(r=1.0, n=2)
    assert np.allclose(lse.grad(np.zeros(2)), [0.5, 0.5])


def _sample_objectives(rng):
    inst = OTInstance(
        C=rng.uniform(0, 1, (2, 3)),
        mu=rng.dirichlet([3.0, 3.0]),
        nu=rng.dirichlet([3.0, 3.0, 3.0]),
    )
    return [
        DiagQuadratic(d=rng.uniform(0.1, 3.0, 4), b=rng.standard_normal(4)),
        DiagQuadratic(d=rng.uniform(0.1, 3.0, 4), b=rng.standard_normal(4), norm_p=1.5),
        DenseQuadratic(A=np.diag([1.0, 2.0, 3.0]) + 0.1, b=rng.standard_normal(3)),
        LogSumExp(r=0.7, n=4),
        OTDualObjective(inst, r=0.5),
    ]


def test_grads_match_finite_differences(rng):
    for f in _sample_objectives(rng):
        dim = 5 if f.kind == "ot-dual" else (3 if f.kind == "dense-quadratic" else 4)
        for _ in range(10):
            x = rng.standard_normal(dim)
            fd = finite_difference_gradient(f.value, x)
            an = f.grad(x)
            assert np.allclose(an, fd, rtol=1e-6, atol=1e-6), f.kind


def test_optimum_consistency(rng):
    for f in _sample_objectives(rng):
        if f.x_star is None:
            continue
        assert abs(f.value(f.x_star) - f.f_star) <= 1e-10
        assert lp_norm(f.grad(f.x_star), 2) <= 1e-8


def test_convexity_sampling(rng):
    for f in _sample_objectives(rng):
        dim = 5 if f.kind == "ot-dual" else (3 if f.kind == "dense-quadratic" else 4)
        for _ in range(20):
            x = rng.standard_normal(dim)
            y = rng.standard_normal(dim)
            assert bregman(f.value, f.grad, x, y) >= -1e-12, f.kind


def test_cocoercivity_sampling_with_declared_constant(rng):
    for f in _sample_objectives(rng):
        dim = 5 if f.kind == "ot-dual" else (3 if f.kind == "dense-quadratic" else 4)
        p = f.norm_p
        q = 1.0 if p == np.inf else p / (p - 1.0)
        # The coupled transport dual acts through (u_i + v_j), which
        # doubles the directional range per unit sup norm; its tight
        # sup-norm constant is 4x the per-block temperature constant.
        L = 4.0 * f.L if f.kind == "ot-dual" else f.L
        for _ in range(30):
            x = rng.standard_normal(dim)
            y = rng.standard_normal(dim)
            d = bregman(f.value, f.grad, x, y)
            assert (
                d >= lp_norm(f.grad(x) - f.grad(y), q) ** 2 / (2.0 * L) - 1e-10
            ), f.kind


def test_smoothness_constant_examples():
    f = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0])
    assert smoothness_constant(f, 2.0) == 4.0
    f15 = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0], norm_p=1.5)
    assert smoothness_constant(f15, 1.5) == 4.0
    inst = OTInstance(C=[[0.0, 1.0], [1.0, 0.0]], mu=[0.5, 0.5], nu=[0.5, 0.5])
    h = OTDualObjective(inst, r=0.05)
    assert smoothness_constant(h, np.inf) == pytest.approx(20.0)


def test_smoothness_constant_rejects_unsupported_p():
    f = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0])
    with pytest.raises(ValueError):
        smoothness_constant(f, 3.0)
    dq = DenseQuadratic(A=np.eye(2), b=np.zeros(2))
    with pytest.raises(ValueError):
        smoothness_constant(dq, 1.5)


def test_dense_quadratic_validation():
    with pytest.raises(ValueError):
        DenseQuadratic(A=[[1.0, 2.0], [0.0, 1.0]], b=[0.0, 0.0])
    with pytest.raises(ValueError):
        DenseQuadratic(A=[[-1.0, 0.0], [0.0, 1.0]], b=[0.0, 0.0])


def test_diag_quadratic_validation():
    with pytest.raises(ValueError):
        DiagQuadratic(d=[-1.0, 1.0], b=[0.0, 0.0])
    with pytest.raises(ValueError):
        DiagQuadratic(d=[1.0, 1.0], b=[0.0, 0.0], norm_p=3.0)


def test_log_sum_exp_overflow_safety():
    f = LogSumExp(r=0.01, n=3)
    x = np.array([1000.0, -1000.0, 0.0])
    assert np.isfinite(f.value(x))
    assert np.all(np.isfinite(f.grad(x)))


def test_dimension_mismatch_errors():
    f = DiagQuadratic(d=[1.0, 4.0], b=[0.0, 0.0])
    with pytest.raises(ValueError):
        f.value(np.ones(3))


def test_descriptor_round_trips(rng):
    for f in _sample_objectives(rng):
        f2 = objective_from_descriptor(f.to_descriptor())
        dim = 5 if f.kind == "ot-dual" else (3 if f.kind == "dense-quadratic" else 4)
        x = rng.standard_normal(dim)
        assert f2.value(x) == pytest.approx(f.value(x), abs=1e-12)
        assert f2.kind == f.kind and f2.L == pytest.approx(f.L)
