"""Closed-form methods: MD, dual-MD, AMD, dual-AMD, and their concatenation.

AMD drives the dual variable with accumulated gradients weighted by the
theta sequence and keeps the primal iterate inside the convex hull of
the mirrored points; its mirror dual (dual-AMD) reduces psi*(grad f)
instead of the function value.  Running AMD for N steps and then
dual-AMD from its output yields the 1/theta_N^4 gradient-magnitude
rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .cfom import CoefficientSchedule, DualTrajectory, Trajectory, _check_finite
from .dgf import DGF
from .objectives import SmoothObjective
from .spaces import DualVector, PrimalVector, Vector

__all__ = [
    "ThetaSequence",
    "theta_sequence",
    "MethodRun",
    "run_md",
    "run_dual_md",
    "run_amd",
    "run_dual_amd",
    "run_concat",
    "amd_schedule",
    "sample_relative_convexity",
]


@dataclass(frozen=True)
class ThetaSequence:
    """Nesterov-type scalars with theta_i^2 - theta_i = theta_{i-1}^2.

    theta_j = 0 for every j <= -1 (index arithmetic in dual-AMD reaches
    j = -3), theta_0 = 1, and theta_N = theta_{N-1}.
    """

    N: int
    values: np.ndarray  # theta_0 .. theta_N

    def __getitem__(self, j: int) -> float:
        if j <= -1:
            return 0.0
        return float(self.values[j])

    def sq(self, j: int) -> float:
        t = self[j]
        return t * t


def theta_sequence(N: int) -> ThetaSequence:
    if N < 1:
        raise ValueError("N >= 1 required")
    vals = np.empty(N + 1)
    vals[0] = 1.0
    for i in range(1, N):
        vals[i] = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * vals[i - 1] ** 2))
    vals[N] = vals[N - 1]
    return ThetaSequence(N=N, values=vals)


def sample_relative_convexity(
    h_major,
    h_minor,
    lam: float,
    dim: int,
    trials: int = 100,
    magnitude: float = 1.0,
    seed: int = 0,
) -> float:
    """Smallest sampled midpoint-convexity gap of lam*h_major - h_minor.

    A sanity check (necessary, not sufficient) for the stepsize
    hypothesis of MD and dual-MD; negative values beyond roundoff mean
    the supplied lam is too small.
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(trials):
        x = magnitude * rng.standard_normal(dim)
        y = magnitude * rng.standard_normal(dim)
        mid = 0.5 * (x + y)

        def d(z):
            return lam * float(h_major(z)) - float(h_minor(z))

        worst = min(worst, 0.5 * d(x) + 0.5 * d(y) - d(mid))
    return worst


@dataclass
class MethodRun:
    """Outcome of a closed-form method run.

    Holds either a primal trajectory (MD, AMD) or a dual one (dual-MD,
    dual-AMD); a concatenated run carries both.  `bound` is the
    certified final bound when the needed reference (x_star or f_star)
    is available.
    """

    method: str
    traj: Optional[Trajectory] = None
    dual_traj: Optional[DualTrajectory] = None
    bound: Optional[float] = None
    theta: Optional[ThetaSequence] = None
    L: Optional[float] = None
    sigma: Optional[float] = None

    @property
    def final_x(self) -> Vector:
        if self.dual_traj is not None:
            return self.dual_traj.qs[-1]
        return self.traj.xs[-1]


def run_md(
    f: SmoothObjective,
    g: DGF,
    alpha: float,
    y0: DualVector,
    N: int,
) -> MethodRun:
    """Mirror descent: y_{k+1} = y_k - alpha grad f(x_k), x_{k+1} = grad phi*(y_{k+1})."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if N < 1:
        raise ValueError("N >= 1 required")
    y0 = np.asarray(y0, dtype=np.float64)
    ys = [y0]
    xs = [g.conjugate_grad(y0)]
    f_grads = [np.asarray(f.grad(xs[0]), dtype=np.float64)]
    for k in range(N):
        y_next = ys[k] - alpha * f_grads[k]
        _check_finite(y_next, "dual iterate y", k + 1)
        ys.append(y_next)
        xs.append(g.conjugate_grad(y_next))
        f_grads.append(np.asarray(f.grad(xs[-1]), dtype=np.float64))
    bound = None
    if f.x_star is not None:
        d0 = g.value(f.x_star) - g.value(xs[0]) - float(g.grad(xs[0]) @ (f.x_star - xs[0]))
        bound = d0 / (alpha * N)
    traj = Trajectory(xs=xs, ys=ys, f_grads=f_grads, mirrors=list(xs))
    return MethodRun(method="md", traj=traj, bound=bound)


def run_dual_md(
    f: SmoothObjective,
    g: DGF,
    alpha: float,
    q0: PrimalVector,
    N: int,
) -> MethodRun:
    """Dual mirror descent: q_{k+1} = q_k - alpha grad psi*(r_k), r_{k+1} = grad f(q_{k+1})."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if N < 1:
        raise ValueError("N >= 1 required")
    q0 = np.asarray(q0, dtype=np.float64)
    qs = [q0]
    f_grads = [np.asarray(f.grad(q0), dtype=np.float64)]
    rs = [f_grads[0]]
    mirrors = [g.conjugate_grad(rs[0])]
    for k in range(N):
        q_next = qs[k] - alpha * mirrors[k]
        _check_finite(q_next, "primal iterate q", k + 1)
        qs.append(q_next)
        f_grads.append(np.asarray(f.grad(q_next), dtype=np.float64))
        rs.append(f_grads[-1])
        mirrors.append(g.conjugate_grad(rs[-1]))
    bound = None
    if f.f_star is not None:
        bound = (f.value(qs[0]) - f.f_star) / (alpha * N)
    dual_traj = DualTrajectory(qs=qs, rs=rs, f_grads=f_grads, mirrors=mirrors)
    return MethodRun(method="dual-md", dual_traj=dual_traj, bound=bound)


def run_amd(
    f: SmoothObjective,
    g: DGF,
    y0: DualVector,
    N: int,
    L: Optional[float] = None,
    sigma: Optional[float] = None,
) -> MethodRun:
    """Accelerated mirror descent with the equality theta sequence."""
    if N < 1:
        raise ValueError("N >= 1 required")
    L = f.L if L is None else L
    sigma = g.sigma if sigma is None else sigma
    th = theta_sequence(N)
    y0 = np.asarray(y0, dtype=np.float64)
    ys = [y0]
    mirrors = [g.conjugate_grad(y0)]
    xs = [mirrors[0]]
    f_grads = [np.asarray(f.grad(xs[0]), dtype=np.float64)]
    for k in range(N):
        y_next = ys[k] - (sigma / L) * (th.sq(k) - th.sq(k - 1)) * f_grads[k]
        _check_finite(y_next, "dual iterate y", k + 1)
        ys.append(y_next)
        mirrors.append(g.conjugate_grad(y_next))
        tk1 = th.sq(k + 1)
        x_next = (
            th.sq(k) / tk1 * xs[k]
            + (tk1 - th.sq(k)) / tk1 * mirrors[k + 1]
            + (th.sq(k) - th.sq(k - 1)) / tk1 * (mirrors[k + 1] - mirrors[k])
        )
        _check_finite(x_next, "primal iterate x", k + 1)
        xs.append(x_next)
        f_grads.append(np.asarray(f.grad(x_next), dtype=np.float64))
    bound = None
    if f.x_star is not None:
        d0 = g.value(f.x_star) - g.value(xs[0]) - float(g.grad(xs[0]) @ (f.x_star - xs[0]))
        bound = L * d0 / (sigma * th.sq(N))
    traj = Trajectory(xs=xs, ys=ys, f_grads=f_grads, mirrors=mirrors)
    return MethodRun(method="amd", traj=traj, bound=bound, theta=th, L=L, sigma=sigma)


def amd_schedule(N: int, L: float, sigma: float) -> CoefficientSchedule:
    """The CFOM coefficient families whose execution reproduces run_amd."""
    if N < 1:
        raise ValueError("N >= 1 required")
    th = theta_sequence(N)
    a = np.zeros((N + 1, N + 1))
    b = np.zeros((N + 1, N + 1))
    b[0, 0] = -1.0
    for k in range(N):
        a[k + 1, k] = (sigma / L) * (th.sq(k) - th.sq(k - 1))
        for s in range(1, k):
            b[k + 1, s] = (th.sq(s - 1) - th.sq(s - 2)) * (1.0 / th.sq(k) - 1.0 / th.sq(k + 1))
        b[k + 1, k] = (th.sq(k) - th.sq(k - 2)) / th.sq(k) - (th.sq(k - 1) - th.sq(k - 2)) / th.sq(k + 1)
        b[k + 1, k + 1] = -(th.sq(k + 1) - th.sq(k - 1)) / th.sq(k + 1)
    return CoefficientSchedule(N=N, a=a, b=b)


def run_dual_amd(
    f: SmoothObjective,
    g: DGF,
    q0: PrimalVector,
    N: int,
    L: Optional[float] = None,
    sigma: Optional[float] = None,
) -> MethodRun:
    """Gradient-magnitude-reducing mirror dual of AMD, in closed form.

    The initialization g_0 = grad f(q_0) / theta_{N-1}^2 and
    r_0 = (theta_N^2 - theta_{N-2}^2) / theta_N^2 * grad f(q_0) is the
    one forced by r_0 = -b_{N,N} grad f(q_0) of the mirror dual.
    """
    if N < 1:
        raise ValueError("N >= 1 required")
    L = f.L if L is None else L
    sigma = g.sigma if sigma is None else sigma
    th = theta_sequence(N)
    q0 = np.asarray(q0, dtype=np.float64)
    qs = [q0]
    f_grads = [np.asarray(f.grad(q0), dtype=np.float64)]
    rs = [(th.sq(N) - th.sq(N - 2)) / th.sq(N) * f_grads[0]]
    gk = f_grads[0] / th.sq(N - 1)
    mirrors = [g.conjugate_grad(rs[0])]
    for k in range(N):
        q_next = qs[k] - (sigma / L) * (th.sq(N - k - 1) - th.sq(N - k - 2)) * mirrors[k]
        _check_finite(q_next, "primal iterate q", k + 1)
        qs.append(q_next)
        f_grads.append(np.asarray(f.grad(q_next), dtype=np.float64))
        g_next = gk + (f_grads[k + 1] - f_grads[k]) / th.sq(N - k - 1)
        r_next = (
            rs[k]
            + (th.sq(N - k - 1) - th.sq(N - k - 2)) * (g_next - gk)
            + (th.sq(N - k - 2) - th.sq(N - k - 3)) * g_next
        )
        _check_finite(r_next, "dual iterate r", k + 1)
        rs.append(r_next)
        mirrors.append(g.conjugate_grad(r_next))
        gk = g_next
    bound = None
    if f.f_star is not None:
        bound = (L / (sigma * th.sq(N))) * (f.value(qs[0]) - f.f_star)
    dual_traj = DualTrajectory(qs=qs, rs=rs, f_grads=f_grads, mirrors=mirrors)
    return MethodRun(method="dual-amd", dual_traj=dual_traj, bound=bound, theta=th, L=L, sigma=sigma)


@dataclass
class ConcatRun:
    """AMD stage followed by a dual-AMD stage started at the AMD output."""

    amd: MethodRun
    dual_amd: MethodRun
    bound: Optional[float] = None

    @property
    def final_x(self) -> Vector:
        return self.dual_amd.dual_traj.qs[-1]

    @property
    def final_r(self) -> Vector:
        return self.dual_amd.dual_traj.rs[-1]


def run_concat(
    f: SmoothObjective,
    phi: DGF,
    psi: DGF,
    y0: DualVector,
    N: int,
    L: Optional[float] = None,
    sigma1: Optional[float] = None,
    sigma2: Optional[float] = None,
) -> ConcatRun:
    """N steps of AMD from y0, then N steps of dual-AMD from q_0 = x_N."""
    L = f.L if L is None else L
    sigma1 = phi.sigma if sigma1 is None else sigma1
    sigma2 = psi.sigma if sigma2 is None else sigma2
    first = run_amd(f, phi, y0, N, L=L, sigma=sigma1)
    second = run_dual_amd(f, psi, first.traj.xs[-1], N, L=L, sigma=sigma2)
    bound = None
    if f.x_star is not None:
        x0 = first.traj.xs[0]
        d0 = phi.value(f.x_star) - phi.value(x0) - float(phi.grad(x0) @ (f.x_star - x0))
        th = first.theta
        bound = L * L * d0 / (sigma1 * sigma2 * th.sq(N) ** 2)
    return ConcatRun(amd=first, dual_amd=second, bound=bound)
