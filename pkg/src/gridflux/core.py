"""Numerical kernels: left null spaces, Lyapunov solves, symmetric
eigenvalue extremes and a fixed-step RK4 integrator.

Everything here works on dense float64 arrays. Inputs are validated
(finite, correct shape) before any factorisation runs.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyNullSpace,
    GuardTripped,
    NonFinite,
    NotHurwitz,
    NotSymmetric,
    SolverSingular,
)

NULL_TOL = 1e-9
SYM_TOL = 1e-12


def as_matrix(a, name="matrix", square=False):
    """Return ``a`` as a finite 2-D float64 array or raise ValueError."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def left_null_space(A, tol=NULL_TOL):
    """Orthonormal basis T (rows) of the left null space of ``A``.

    Singular values below ``tol * sigma_max`` count as zero. Each row is
    signed so that its largest-magnitude entry is positive.

    Raises:
        EmptyNullSpace: if ``A`` has full row rank at this tolerance.
    """
    A = as_matrix(A, "A")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = A.shape[0]
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    if rank == m:
        raise EmptyNullSpace(f"A ({A.shape[0]}x{A.shape[1]}) has full row rank at tol={tol:g}")
    T = U[:, rank:].T.copy()
    for row in T:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1.0
    return T


def is_hurwitz(A):
    return bool(np.max(np.linalg.eigvals(as_matrix(A, "A", square=True)).real) < 0)


def solve_lyapunov(A, G):
    """Solve ``A.T @ H + H @ A = -G`` for symmetric H.

    The Kronecker-vectorised system is solved directly, so keep n small
    (n <= 50 is comfortable). The result is symmetrised before return.

    Raises:
        NotHurwitz: ``A`` has an eigenvalue with non-negative real part.
        NotSymmetric: ``G`` is not symmetric.
        SolverSingular: the vectorised operator is numerically singular.
    """
    A = as_matrix(A, "A", square=True)
    G = as_matrix(G, "G", square=True)
    n = A.shape[0]
    if G.shape != (n, n):
        raise DimensionMismatch(f"G shape {G.shape} does not match A shape {A.shape}")
    _check_symmetric(G, "G")
    ev = np.linalg.eigvals(A)
    if np.max(ev.real) >= 0:
        raise NotHurwitz(f"max Re(eig(A)) = {np.max(ev.real):.6g}")
    eye = np.eye(n)
    # column-major vec: vec(A^T H) = (I kron A^T) vec H, vec(H A) = (A^T kron I) vec H
    K = np.kron(eye, A.T) + np.kron(A.T, eye)
    if np.linalg.cond(K) > 1.0 / np.finfo(float).eps:
        raise SolverSingular("Lyapunov operator is numerically singular")
    try:
        h = np.linalg.solve(K, -G.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise SolverSingular(str(exc)) from exc
    H = h.reshape((n, n), order="F")
    return 0.5 * (H + H.T)


def lyapunov_residual(A, H, G):
    """Frobenius norm of ``A.T H + H A + G``."""
    return float(np.linalg.norm(A.T @ H + H @ A + G))


def _check_symmetric(M, name):
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > SYM_TOL * scale:
        raise NotSymmetric(f"{name} is not symmetric")


def eig_extremes_sym(M):
    """(lambda_min, lambda_max) of a symmetric matrix."""
    M = as_matrix(M, "M", square=True)
    _check_symmetric(M, "M")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(w[0]), float(w[-1])


@dataclass(frozen=True)
class OdeProblem:
    """Fixed-step initial value problem.

    Attributes:
        rhs: ``f(t, x) -> dx/dt``.
        x0: initial state.
        t0, tf: time span; ``tf - t0`` must be an integer number of steps.
        dt: step size.
        guard: optional ``g(t, x) -> bool``; False at a grid point raises
            GuardTripped. ``rhs`` may also raise GuardTripped itself.
        on_step: optional ``h(t_k)`` called before each step's stages; lets
            piecewise inputs pick the branch active inside the step so that
            breaks on grid points do not cost accuracy.
    """

    rhs: Callable[[float, np.ndarray], np.ndarray]
    x0: np.ndarray
    t0: float
    tf: float
    dt: float
    guard: Optional[Callable[[float, np.ndarray], bool]] = None
    on_step: Optional[Callable[[float], None]] = None


@dataclass
class Solution:
    t: np.ndarray
    x: np.ndarray

    def __len__(self):
        return len(self.t)


def step_count(t0, tf, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = tf - t0
    if span < 0:
        raise ValueError("tf must not precede t0")
    n = int(round(span / dt))
    if abs(n * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"time span {span:g} is not a multiple of dt={dt:g}")
    return n


def rk4_step(f, t, x, dt):
    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, x + (0.5 * dt) * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(problem: OdeProblem) -> Solution:
    """Classical RK4 on the grid ``t0 + k*dt``, k = 0..N.

    Raises:
        GuardTripped: guard failed; ``exc.trajectory`` holds samples so far.
        NonFinite: the state went NaN/inf; ``exc.trajectory`` likewise.
    """
    n = step_count(problem.t0, problem.tf, problem.dt)
    x0 = np.array(problem.x0, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 contains non-finite entries")
    t = problem.t0 + problem.dt * np.arange(n + 1)
    xs = np.empty((n + 1, x0.size))
    xs[0] = x0
    x = x0
    guard = problem.guard
    on_step = problem.on_step
    for k in range(n):
        tk = t[k]
        if on_step is not None:
            on_step(tk)
        try:
            if guard is not None and not guard(tk, x):
                raise GuardTripped(tk, "guard predicate failed")
            x = rk4_step(problem.rhs, tk, x, problem.dt)
        except GuardTripped as exc:
            # report the grid time of the failing step, not the stage time
            raise GuardTripped(tk, "guard tripped in the step from", Solution(t[: k + 1], xs[: k + 1])) from None
        if not np.all(np.isfinite(x)):
            raise NonFinite(t[k + 1], "non-finite state", Solution(t[: k + 1], xs[: k + 1]))
        xs[k + 1] = x
    if guard is not None and not guard(t[n], x):
        raise GuardTripped(t[n], "guard tripped", Solution(t, xs))
    return Solution(t, xs)
