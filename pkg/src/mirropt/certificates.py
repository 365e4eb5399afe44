"""Numerical Lyapunov certificates and the duality bijection check.

Two energy sequences are evaluated along trajectories: U_k for primal
runs (certifying function-value decrease) and V_k for dual runs
(certifying gradient-magnitude decrease).  Each is nonincreasing by
construction, with every subtracted bracket nonnegative by convexity,
cocoercivity, or the Fenchel inequality.  The leftover residual
functionals U_A and V_B depend only on the two gradient families; the
bijection

    C_0 = u_N A_N,  C_{N-i} - C_{N-i-1} = u_i (A_i - A_{i+1}),  D_i = B_{N-i}

maps one onto the other exactly, for any schedule, which is the
identity realized numerically by check_mirror_duality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .cfom import CoefficientSchedule, DualTrajectory, Trajectory
from .dgf import DGF
from .objectives import SmoothObjective
from .spaces import NormIndex, Vector, lp_norm, pairing

__all__ = [
    "GradientScenario",
    "EnergyTrace",
    "primal_energy_trace",
    "dual_energy_trace",
    "evaluate_U",
    "evaluate_V",
    "duality_transform",
    "check_mirror_duality",
    "DualityReport",
]


@dataclass
class GradientScenario:
    """Free variables standing for {grad f(x_i)} (A) and {grad phi*(y_i)} (B)."""

    A: List[Vector]
    B: List[Vector]

    def __post_init__(self):
        if len(self.A) != len(self.B):
            raise ValueError("A and B must have the same length N+1")
        dims = {v.shape for v in self.A} | {v.shape for v in self.B}
        if len(dims) != 1:
            raise ValueError("inconsistent scenario dimensions")

    @property
    def N(self) -> int:
        return len(self.A) - 1


@dataclass
class EnergyTrace:
    """Energy values E_0..E_N plus the labeled decrement decomposition.

    decrements[k] holds the brackets subtracted going from E_k to
    E_{k+1}; every entry is nonnegative up to roundoff when the run's
    declared constants are correct.
    """

    energies: List[float]
    decrements: List[dict]
    final_terms: dict = field(default_factory=dict)

    def min_labeled_term(self) -> float:
        vals = [t for d in self.decrements for t in d.values()]
        return min(vals) if vals else 0.0

    def max_increase(self) -> float:
        e = np.asarray(self.energies)
        return float(np.max(e[1:] - e[:-1])) if len(e) > 1 else 0.0


def _d_f(f: SmoothObjective, fx: float, fx2: float, g2: Vector, x: Vector, x2: Vector) -> float:
    """D_f(x, x2) from precomputed values f(x), f(x2) and grad f(x2)."""
    return fx - fx2 - pairing(g2, x - x2)


def primal_energy_trace(
    traj: Trajectory,
    x: Vector,
    u: Sequence[float],
    f: SmoothObjective,
    g: DGF,
    L: Optional[float] = None,
    sigma: Optional[float] = None,
) -> EnergyTrace:
    """U_k along a primal run against the comparison point x.

    U_0 = phi(x) + phi*(y_0) - <y_0, x> - u_0 D_f(x, x_0), and each step
    subtracts the convexity bracket (u_{k+1}-u_k) D_f(x, x_{k+1}) and
    the two cocoercivity brackets for f and phi*.  The final terms
    isolate u_N (f(x_N) - f(x)), the Fenchel residual at (x, y_N), the
    pairing term, and the leftover U_A.
    """
    L = f.L if L is None else L
    sigma = g.sigma if sigma is None else sigma
    N = len(traj.xs) - 1
    u = [float(v) for v in u]
    if len(u) != N + 1:
        raise ValueError("u must have length N+1")
    q = g.q
    p = g.p
    x = np.asarray(x, dtype=np.float64)
    fx = f.value(x)
    f_vals = [f.value(xi) for xi in traj.xs]
    phi_conj = [g.conjugate_value(yi) for yi in traj.ys]

    e0 = g.value(x) + phi_conj[0] - pairing(traj.ys[0], x)
    e0 -= u[0] * _d_f(f, fx, f_vals[0], traj.f_grads[0], x, traj.xs[0])
    energies = [e0]
    decrements = []
    for k in range(N):
        cvx = _d_f(f, fx, f_vals[k + 1], traj.f_grads[k + 1], x, traj.xs[k + 1])
        coco_f = (
            _d_f(f, f_vals[k], f_vals[k + 1], traj.f_grads[k + 1], traj.xs[k], traj.xs[k + 1])
            - lp_norm(traj.f_grads[k] - traj.f_grads[k + 1], q) ** 2 / (2.0 * L)
        )
        coco_conj = (
            phi_conj[k] - phi_conj[k + 1]
            - pairing(traj.ys[k] - traj.ys[k + 1], traj.mirrors[k + 1])
            - sigma / 2.0 * lp_norm(traj.mirrors[k + 1] - traj.mirrors[k], p) ** 2
        )
        decrements.append({"convexity": cvx, "coco_f": coco_f, "coco_conjugate": coco_conj})
        energies.append(energies[-1] - (u[k + 1] - u[k]) * cvx - u[k] * coco_f - coco_conj)

    fenchel = g.value(x) + phi_conj[N] - pairing(traj.ys[N], x)
    pairing_vec = traj.ys[N] - traj.ys[0]
    prev = 0.0
    for i in range(N + 1):
        pairing_vec = pairing_vec + (u[i] - prev) * traj.f_grads[i]
        prev = u[i]
    value_term = u[N] * (f_vals[N] - fx)
    u_A = energies[N] - value_term - fenchel - pairing(pairing_vec, x)
    final_terms = {
        "value_term": value_term,
        "fenchel_residual": fenchel,
        "pairing_term": pairing(pairing_vec, x),
        "pairing_vector_norm": lp_norm(pairing_vec, 2),
        "U_A": u_A,
        "certified_bound": (g.value(x) + phi_conj[0] - pairing(traj.ys[0], x)) / u[N],
    }
    return EnergyTrace(energies=energies, decrements=decrements, final_terms=final_terms)


def dual_energy_trace(
    traj: DualTrajectory,
    v: Sequence[float],
    f: SmoothObjective,
    g: DGF,
    L: Optional[float] = None,
    sigma: Optional[float] = None,
) -> EnergyTrace:
    """V_k along a dual run; V_0 = v_0 (f(q_0) - f(q_N)).

    The final decomposition is V_N = psi*(r_N) + D_{psi*}(0, r_0) + V_B,
    using psi*(0) = 0 for the unshifted DGF.
    """
    if g.shifted:
        raise ValueError("dual energies require an unshifted DGF (psi*(0) = 0)")
    L = f.L if L is None else L
    sigma = g.sigma if sigma is None else sigma
    N = len(traj.qs) - 1
    v = [float(x) for x in v]
    if len(v) != N + 1:
        raise ValueError("v must have length N+1")
    q = g.q
    p = g.p
    f_vals = [f.value(qi) for qi in traj.qs]
    psi_conj = [g.conjugate_value(ri) for ri in traj.rs]

    energies = [v[0] * (f_vals[0] - f_vals[N])]
    decrements = []
    for k in range(N):
        cvx = _d_f(f, f_vals[N], f_vals[k], traj.f_grads[k], traj.qs[N], traj.qs[k])
        coco_f = (
            _d_f(f, f_vals[k], f_vals[k + 1], traj.f_grads[k + 1], traj.qs[k], traj.qs[k + 1])
            - lp_norm(traj.f_grads[k] - traj.f_grads[k + 1], q) ** 2 / (2.0 * L)
        )
        coco_conj = (
            psi_conj[k] - psi_conj[k + 1]
            - pairing(traj.rs[k] - traj.rs[k + 1], traj.mirrors[k + 1])
            - sigma / 2.0 * lp_norm(traj.mirrors[k + 1] - traj.mirrors[k], p) ** 2
        )
        decrements.append({"convexity": cvx, "coco_f": coco_f, "coco_conjugate": coco_conj})
        energies.append(energies[-1] - (v[k + 1] - v[k]) * cvx - v[k + 1] * coco_f - coco_conj)

    d_psi_conj_0_r0 = -psi_conj[0] + pairing(traj.rs[0], traj.mirrors[0])
    v_B = energies[N] - psi_conj[N] - d_psi_conj_0_r0
    final_terms = {
        "psi_conj_final": psi_conj[N],
        "bregman_zero_r0": d_psi_conj_0_r0,
        "V_B": v_B,
        "certified_bound": energies[0],
    }
    return EnergyTrace(energies=energies, decrements=decrements, final_terms=final_terms)


def _reconstruct_primal_iterates(s: CoefficientSchedule, B: List[Vector]) -> List[Vector]:
    """x_k as driven by the schedule when grad phi*(y_i) is replaced by B_i."""
    xs = [B[0]]
    for k in range(s.N):
        x_next = xs[k].copy()
        for i in range(k + 2):
            if s.b[k + 1, i] != 0.0:
                x_next = x_next - s.b[k + 1, i] * B[i]
        xs.append(x_next)
    return xs


def evaluate_U(
    s: CoefficientSchedule,
    u: Sequence[float],
    L: float,
    sigma: float,
    scenario: GradientScenario,
    norm: Optional[NormIndex] = None,
) -> float:
    """Closed-form U_A as a function of the gradient families alone."""
    N = s.N
    if scenario.N != N:
        raise ValueError("scenario length does not match schedule")
    u = [float(x) for x in u]
    p = norm.p if norm is not None else 2.0
    q = norm.q if norm is not None else 2.0
    A, B = scenario.A, scenario.B
    xs = _reconstruct_primal_iterates(s, B)
    total = 0.0
    for k in range(N):
        total += u[k] / (2.0 * L) * lp_norm(A[k] - A[k + 1], q) ** 2
        total += sigma / 2.0 * lp_norm(B[k] - B[k + 1], p) ** 2
        y_step = np.zeros_like(A[0])
        for i in range(k + 1):
            if s.a[k + 1, i] != 0.0:
                y_step = y_step + s.a[k + 1, i] * A[i]
        total += pairing(y_step, B[k + 1])
    for k in range(N + 1):
        a_next = A[k + 1] if k + 1 <= N else np.zeros_like(A[0])
        total -= u[k] * pairing(A[k] - a_next, xs[k])
    return total


def evaluate_V(
    s: CoefficientSchedule,
    v: Sequence[float],
    L: float,
    sigma: float,
    scenario: GradientScenario,
    norm: Optional[NormIndex] = None,
) -> float:
    """Closed-form V_B of the mirror dual of s, on scenario (C, D)."""
    N = s.N
    if scenario.N != N:
        raise ValueError("scenario length does not match schedule")
    v = [float(x) for x in v]
    p = norm.p if norm is not None else 2.0
    q = norm.q if norm is not None else 2.0
    C, D = scenario.A, scenario.B
    total = 0.0
    for k in range(N):
        total += v[k + 1] / (2.0 * L) * lp_norm(C[k] - C[k + 1], q) ** 2
        total += sigma / 2.0 * lp_norm(D[k] - D[k + 1], p) ** 2
    # sum_k < r_{k-1} - r_k, D_k > with r_{k-1} - r_k = sum_i b_{N-i,N-k} C_i.
    for k in range(N + 1):
        r_step = np.zeros_like(C[0])
        for i in range(k + 1):
            if s.b[N - i, N - k] != 0.0:
                r_step = r_step + s.b[N - i, N - k] * C[i]
        total += pairing(r_step, D[k])
    for k in range(N):
        bracket = v[k + 1] * C[k + 1]
        for j in range(k + 1):
            bracket = bracket - (v[j + 1] - v[j]) * C[j]
        q_step = np.zeros_like(D[0])
        for i in range(k + 1):
            if s.a[N - i, N - 1 - k] != 0.0:
                q_step = q_step + s.a[N - i, N - 1 - k] * D[i]
        total += pairing(bracket, q_step)
    return total


def duality_transform(u: Sequence[float], scenario: GradientScenario) -> GradientScenario:
    """Map (A, B) to (C, D) per the bijection; invertible since u > 0."""
    u = [float(x) for x in u]
    if any(ui <= 0 for ui in u):
        raise ValueError("u must be positive")
    A, B = scenario.A, scenario.B
    N = scenario.N
    C: List[Vector] = [None] * (N + 1)
    C[0] = u[N] * A[N]
    for i in range(N - 1, -1, -1):
        a_next = A[i + 1] if i + 1 <= N else np.zeros_like(A[0])
        C[N - i] = C[N - i - 1] + u[i] * (A[i] - a_next)
    D = [B[N - i] for i in range(N + 1)]
    return GradientScenario(A=C, B=D)


def inverse_duality_transform(u: Sequence[float], scenario: GradientScenario) -> GradientScenario:
    u = [float(x) for x in u]
    C, D = scenario.A, scenario.B
    N = scenario.N
    A: List[Vector] = [None] * (N + 1)
    A[N] = C[0] / u[N]
    for i in range(N - 1, -1, -1):
        a_next = A[i + 1]
        A[i] = a_next + (C[N - i] - C[N - i - 1]) / u[i]
    B = [D[N - i] for i in range(N + 1)]
    return GradientScenario(A=A, B=B)


@dataclass
class DualityReport:
    trials: int
    max_residual: float
    failures: List[dict]
    tol: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "max_residual": self.max_residual,
            "failures": self.failures,
            "tol": self.tol,
        }


def check_mirror_duality(
    s: CoefficientSchedule,
    u: Sequence[float],
    L: float,
    sigma: float,
    trials: int,
    dim: int = 4,
    norm: Optional[NormIndex] = None,
    magnitude: float = 1.0,
    tol: float = 1e-9,
    seed: int = 0,
    v: Optional[Sequence[float]] = None,
) -> DualityReport:
    """Sample random scenarios and assert U_A(A,B) = V_B(C,D) under the bijection.

    v defaults to the conjugate weights 1/u_{N-i}; passing anything else
    breaks the identity and is reported as failures.
    """
    rng = np.random.default_rng(seed)
    u = [float(x) for x in u]
    N = s.N
    if v is None:
        v = [1.0 / u[N - i] for i in range(N + 1)]
    max_res = 0.0
    failures = []
    for t in range(trials):
        A = [magnitude * rng.standard_normal(dim) for _ in range(N + 1)]
        B = [magnitude * rng.standard_normal(dim) for _ in range(N + 1)]
        sc = GradientScenario(A=A, B=B)
        u_val = evaluate_U(s, u, L, sigma, sc, norm=norm)
        v_val = evaluate_V(s, v, L, sigma, duality_transform(u, sc), norm=norm)
        res = abs(u_val - v_val) / (1.0 + abs(u_val))
        max_res = max(max_res, res)
        if res > tol:
            failures.append({"trial": t, "U": u_val, "V": v_val, "residual": res})
    return DualityReport(trials=trials, max_residual=max_res, failures=failures, tol=tol)
