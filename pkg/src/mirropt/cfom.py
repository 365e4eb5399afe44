"""Coupled first-order methods: schedules, executors, and the mirror dual.

A coupled first-order method (CFOM) is parameterized by triangular
coefficient families {a_{k,i}} and {b_{k,i}}:

    y_{k+1} = y_k - sum_{i<=k}   a_{k+1,i} grad f(x_i)
    x_{k+1} = x_k - sum_{i<=k+1} b_{k+1,i} grad phi*(y_i)

with x_0 = grad phi*(y_0) and b_{0,0} = -1 by convention.  Its mirror
dual runs the anti-transposed coefficients with the roles of f and the
conjugate DGF swapped:

    q_{k+1} = q_k - sum_{i<=k}   a_{N-i,N-1-k} grad psi*(r_i)
    r_{k+1} = r_k - sum_{i<=k+1} b_{N-i,N-1-k} grad f(q_i)

with r_0 = -b_{N,N} grad f(q_0).  In the Euclidean case both reduce to
fixed-step first-order methods (FSFOMs) whose stepsize matrices are
anti-diagonal transposes of each other.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .dgf import DGF
from .objectives import SmoothObjective
from .spaces import DualVector, PrimalVector, Vector

__all__ = [
    "CoefficientSchedule",
    "ValidityReport",
    "Trajectory",
    "DualTrajectory",
    "validate_schedule",
    "run_cfom",
    "mirror_dual_schedule",
    "run_dual_cfom",
    "run_mirror_dual",
    "to_h_matrix",
    "anti_transpose",
    "load_schedule",
    "save_schedule",
    "schedule_to_json_dict",
]

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientSchedule:
    """Dense lower-triangular coefficient families defining a CFOM.

    a[k, i] is nonzero only for 0 <= i < k <= N and b[k, i] only for
    0 <= i <= k <= N.  b[0, 0] is -1 for a primal schedule; a mirror
    dual schedule stores b_{N,N} of its primal there, which encodes the
    r_0 initialization of the dual iteration.
    """

    N: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N >= 1 required")
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.shape != (self.N + 1, self.N + 1) or b.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"coefficient arrays must have shape ({self.N + 1}, {self.N + 1})")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite coefficient")
        # Zero outside the triangles (a strict, b inclusive).
        for k in range(self.N + 1):
            if np.any(a[k, k:] != 0.0) or np.any(b[k, k + 1:] != 0.0):
                raise ValueError("coefficients outside the triangular index range")
        if np.any(a[0, :] != 0.0):
            raise ValueError("a has no row 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def r0_coef(self) -> float:
        """Initial coefficient -b_{N,N} used by the mirror dual of this schedule."""
        return -float(self.b[self.N, self.N])

    def is_primal_convention(self) -> bool:
        return self.b[0, 0] == -1.0


def schedule_from_entries(N: int, a_entries, b_entries, b00: Optional[float] = None) -> CoefficientSchedule:
    """Build a schedule from sparse (k, i, value) triples; omitted entries are zero."""
    a = np.zeros((N + 1, N + 1))
    b = np.zeros((N + 1, N + 1))
    b[0, 0] = -1.0
    for k, i, v in a_entries:
        k, i = int(k), int(i)
        if not (0 <= i < k <= N):
            raise ValueError(f"a index ({k},{i}) outside triangle")
        a[k, i] = float(v)
    for k, i, v in b_entries:
        k, i = int(k), int(i)
        if not (0 <= i <= k <= N):
            raise ValueError(f"b index ({k},{i}) outside triangle")
        b[k, i] = float(v)
    if b00 is not None:
        b[0, 0] = b00
    return CoefficientSchedule(N=N, a=a, b=b)


@dataclass
class ValidityReport:
    """Row residuals of the convex-hull condition sum_{i<=k} b_{k,i} = 0."""

    residuals: np.ndarray  # length N, rows 1..N
    tol: float = ROW_SUM_TOL

    @property
    def ok(self) -> bool:
        return bool(np.all(np.abs(self.residuals) <= self.tol))

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))


def validate_schedule(s: CoefficientSchedule, tol: float = ROW_SUM_TOL) -> ValidityReport:
    res = np.array([float(np.sum(s.b[k, : k + 1])) for k in range(1, s.N + 1)])
    return ValidityReport(residuals=res, tol=tol)


@dataclass
class Trajectory:
    """Primal CFOM run: iterates plus the cached oracle outputs."""

    xs: List[Vector]        # x_0 .. x_N
    ys: List[Vector]        # y_0 .. y_N
    f_grads: List[Vector]   # grad f(x_k)
    mirrors: List[Vector]   # grad phi*(y_k)


@dataclass
class DualTrajectory:
    """Mirror-dual run: q/r iterates plus cached oracle outputs."""

    qs: List[Vector]        # q_0 .. q_N
    rs: List[Vector]        # r_0 .. r_N
    f_grads: List[Vector]   # grad f(q_k)
    mirrors: List[Vector]   # grad psi*(r_k)


def _check_finite(v: Vector, what: str, k: int) -> Vector:
    if not np.all(np.isfinite(v)):
        raise FloatingPointError(f"non-finite {what} at iteration {k}")
    return v


def run_cfom(
    s: CoefficientSchedule,
    f: SmoothObjective,
    g: DGF,
    y0: DualVector,
) -> Trajectory:
    """Execute the CFOM defined by s for N steps from y0, x0 = grad phi*(y0)."""
    y0 = np.asarray(y0, dtype=np.float64)
    ys = [y0]
    mirrors = [g.conjugate_grad(y0)]
    xs = [mirrors[0]]
    f_grads = [np.asarray(f.grad(xs[0]), dtype=np.float64)]
    for k in range(s.N):
        y_next = ys[k].copy()
        for i in range(k + 1):
            aki = s.a[k + 1, i]
            if aki != 0.0:
                y_next = y_next - aki * f_grads[i]
        _check_finite(y_next, "dual iterate y", k + 1)
        ys.append(y_next)
        mirrors.append(g.conjugate_grad(y_next))
        x_next = xs[k].copy()
        for i in range(k + 2):
            bki = s.b[k + 1, i]
            if bki != 0.0:
                x_next = x_next - bki * mirrors[i]
        _check_finite(x_next, "primal iterate x", k + 1)
        xs.append(x_next)
        f_grads.append(np.asarray(f.grad(x_next), dtype=np.float64))
    return Trajectory(xs=xs, ys=ys, f_grads=f_grads, mirrors=mirrors)


def mirror_dual_schedule(s: CoefficientSchedule) -> CoefficientSchedule:
    """Anti-transpose of the coefficient triangles; an exact involution.

    The returned schedule's b[0, 0] equals the input's b[N, N]: read
    directly by the dual executor, its negation is the r_0 coefficient.
    """
    N = s.N
    a = np.zeros_like(s.a)
    b = np.zeros_like(s.b)
    for r in range(1, N + 1):
        for c in range(r):
            a[r, c] = s.a[N - c, N - r]
    for r in range(N + 1):
        for c in range(r + 1):
            b[r, c] = s.b[N - c, N - r]
    return CoefficientSchedule(N=N, a=a, b=b)


def run_dual_cfom(
    s_dual: CoefficientSchedule,
    f: SmoothObjective,
    g: DGF,
    q0: PrimalVector,
) -> DualTrajectory:
    """Execute a dual-form schedule directly: coefficients read as stored,
    r_0 = -b[0, 0] grad f(q_0)."""
    q0 = np.asarray(q0, dtype=np.float64)
    qs = [q0]
    f_grads = [np.asarray(f.grad(q0), dtype=np.float64)]
    rs = [-s_dual.b[0, 0] * f_grads[0]]
    mirrors = [g.conjugate_grad(rs[0])]
    for k in range(s_dual.N):
        q_next = qs[k].copy()
        for i in range(k + 1):
            aki = s_dual.a[k + 1, i]
            if aki != 0.0:
                q_next = q_next - aki * mirrors[i]
        _check_finite(q_next, "primal iterate q", k + 1)
        qs.append(q_next)
        f_grads.append(np.asarray(f.grad(q_next), dtype=np.float64))
        r_next = rs[k].copy()
        for i in range(k + 2):
            bki = s_dual.b[k + 1, i]
            if bki != 0.0:
                r_next = r_next - bki * f_grads[i]
        _check_finite(r_next, "dual iterate r", k + 1)
        rs.append(r_next)
        mirrors.append(g.conjugate_grad(r_next))
    return DualTrajectory(qs=qs, rs=rs, f_grads=f_grads, mirrors=mirrors)


def run_mirror_dual(
    s: CoefficientSchedule,
    f: SmoothObjective,
    g: DGF,
    q0: PrimalVector,
) -> DualTrajectory:
    """Execute the mirror dual of the (primal) schedule s from q0."""
    return run_dual_cfom(mirror_dual_schedule(s), f, g, q0)


def to_h_matrix(s: CoefficientSchedule, L: float = 1.0, form: str = "primal") -> np.ndarray:
    """Stepsize matrix H of the Euclidean (phi = psi = half-sq-l2) reduction.

    The resulting FSFOM is x_{k+1} = x_k - (1/L) sum_i H[k, i] grad f(x_i)
    (0-based rows k = 0..N-1).  form="primal" interprets s as a CFOM,
    form="dual" interprets it as a dual-form schedule (a drives the
    primal update, b drives the dual one).  Requires the convex-hull
    row-sum condition so that the y_0 dependence cancels.
    """
    N = s.N
    H = np.zeros((N, N))
    if form == "primal":
        if not validate_schedule(s).ok:
            raise ValueError("schedule fails the convex-hull row-sum condition")
        # S[i, l] = coefficient of grad f(x_l) in (y_0 - y_i).
        S = np.zeros((N + 1, N + 1))
        for i in range(1, N + 1):
            S[i] = S[i - 1]
            S[i, :i] = S[i, :i] + s.a[i, :i]
        for k in range(N):
            for l in range(k + 1):
                coef = 0.0
                for i in range(k + 2):
                    coef += s.b[k + 1, i] * S[i, l]
                H[k, l] = -L * coef
    elif form == "dual":
        # rho[i, l] = coefficient of grad f(q_l) in r_i.
        rho = np.zeros((N + 1, N + 1))
        rho[0, 0] = -s.b[0, 0]
        for i in range(1, N + 1):
            rho[i] = rho[i - 1]
            rho[i, : i + 1] = rho[i, : i + 1] - s.b[i, : i + 1]
        for k in range(N):
            for l in range(k + 1):
                coef = 0.0
                for i in range(k + 1):
                    coef += s.a[k + 1, i] * rho[i, l]
                H[k, l] = L * coef
    else:
        raise ValueError(f"unknown form {form!r}")
    return H


def anti_transpose(H: np.ndarray) -> np.ndarray:
    """H^A with H^A[i, j] = H[N-1-j, N-1-i] (0-based)."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("anti_transpose expects a square matrix")
    return H[::-1, ::-1].T.copy()


def schedule_to_json_dict(s: CoefficientSchedule) -> dict:
    a_entries = [
        [k, i, s.a[k, i]]
        for k in range(1, s.N + 1)
        for i in range(k)
        if s.a[k, i] != 0.0
    ]
    b_entries = [
        [k, i, s.b[k, i]]
        for k in range(s.N + 1)
        for i in range(k + 1)
        if s.b[k, i] != 0.0
    ]
    return {"N": s.N, "a": a_entries, "b": b_entries}


def save_schedule(s: CoefficientSchedule, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(schedule_to_json_dict(s), fh, indent=1)
        fh.write("\n")


def load_schedule(path_or_dict) -> CoefficientSchedule:
    """Load the JSON schedule format; an omitted b(0,0) defaults to -1."""
    if isinstance(path_or_dict, dict):
        doc = path_or_dict
    else:
        with open(path_or_dict) as fh:
            doc = json.load(fh)
    N = int(doc["N"])
    b_entries = doc.get("b", [])
    b00 = None
    for k, i, v in b_entries:
        if int(k) == 0 and int(i) == 0:
            b00 = float(v)
    return schedule_from_entries(N, doc.get("a", []), b_entries, b00=b00)
