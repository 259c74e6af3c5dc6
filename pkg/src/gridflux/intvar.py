"""Interaction variables.

Two views of the same idea live here.

*Linear models.* If ``T A = 0`` then ``z = T x`` cannot be changed by the
module's own dynamics; only exchange with the outside moves it. For an
area model ``z`` is (a multiple of) total generation, and its rate is set
by tie-line exports and load changes alone.

*Energy ports.* Any module can be summarised by its stored energy ``E``,
the energy rate ``p = dE/dt`` and the inductor's "reactive" energy
``E_t``. The port exchange is described by real power ``P`` and the rate
of reactive power ``Qdot``. Port flows here are positive out of the module
that owns them.
"""

from dataclasses import dataclass
import math

import numpy as np

from .components import RlcParams, StateSpaceModel
from .core import NULL_TOL, as_matrix, left_null_space
from .errors import DimensionMismatch, GuardTripped

PORT_TOL = 1e-9


@dataclass(frozen=True)
class InteractionTransform:
    """Rows of ``T`` span the left null space of the source matrix."""

    T: np.ndarray
    residual: float
    source_dim: int
    tol: float

    @property
    def n_vars(self):
        return self.T.shape[0]

    def apply(self, x):
        """``z = T x``; ``x`` may be one state or a (samples, n) array."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.source_dim:
            raise DimensionMismatch(f"state width {x.shape[-1]} != {self.source_dim}")
        return x @ self.T.T


def extract_intvar(model, tol=NULL_TOL) -> InteractionTransform:
    """Interaction transform of a model (or of a bare matrix)."""
    A = model.A if isinstance(model, StateSpaceModel) else as_matrix(model, "A", square=True)
    T = left_null_space(A, tol)
    res = float(np.max(np.abs(T @ A))) if A.size else 0.0
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if res > tol * max(scale, 1.0):
        raise ArithmeticError(f"null-space residual {res:.3g} exceeds tolerance")
    return InteractionTransform(T, res, A.shape[0], tol)


def intvar_rate(transform: InteractionTransform, Fe_dot, D_P, PL_dot):
    """``dz/dt = T_PG (dF_e + D_P dP_L)``.

    ``T_PG`` is the trailing block of ``T`` over the generator powers,
    whose width is taken from ``Fe_dot``.
    """
    Fe_dot = np.atleast_1d(np.asarray(Fe_dot, dtype=float))
    PL_dot = np.atleast_1d(np.asarray(PL_dot, dtype=float))
    D_P = np.atleast_2d(np.asarray(D_P, dtype=float))
    ng = Fe_dot.shape[-1]
    if D_P.shape != (ng, PL_dot.shape[-1]):
        raise DimensionMismatch(f"D_P shape {D_P.shape} vs {ng} generators, {PL_dot.shape[-1]} loads")
    T_pg = transform.T[:, transform.source_dim - ng:]
    return (Fe_dot + PL_dot @ D_P.T) @ T_pg.T


def reduce_by_intvar(A, T):
    """Matrix of ``A`` restricted to the invariant subspace ``T x = 0``.

    Returns ``(A_red, N)`` with ``N`` an orthonormal basis of the subspace
    and ``A_red = N.T A N``; the spectrum of ``A_red`` is that of ``A``
    with the conserved directions removed.
    """
    A = as_matrix(A, "A", square=True)
    _, s, Vt = np.linalg.svd(np.atleast_2d(T), full_matrices=True)
    N = Vt[np.sum(s > NULL_TOL * s[0]):].T
    return N.T @ A @ N, N


@dataclass(frozen=True)
class PortFlow:
    """Real power ``P`` and reactive-power rate ``Qdot`` through a port."""

    P: float
    Qdot: float

    def __sub__(self, other):
        return PortFlow(self.P - other.P, self.Qdot - other.Qdot)

    def as_array(self):
        return np.array([self.P, self.Qdot])


@dataclass(frozen=True)
class EnergyState:
    """Stored energy ``E``, its rate ``p`` and the reactive energy ``Et``."""

    E: float
    p: float
    Et: float

    def as_array(self):
        return np.array([self.E, self.p])


def port_flow(v, i, dv, di):
    """Flow through a port at voltage ``v`` carrying current ``i``."""
    return PortFlow(v * i, v * di - i * dv)


def energy_state_rlc(p: RlcParams, i, di):
    """Energy state of the source-side line module (the inductor)."""
    return EnergyState(0.5 * p.L * i * i, p.L * i * di, 0.5 * p.L * di * di)


def interface_energy(p: RlcParams, v):
    """Energy held by the bus capacitance, which belongs to the load module."""
    return 0.5 * p.C * v * v


def port_flow_rlc(i, v, di, dv):
    """Line module's outgoing flow at the load bus."""
    return port_flow(v, i, dv, di)


def source_flow(u, i, du, di):
    """Flow injected by the controllable source into the line module."""
    return port_flow(u, i, du, di)


def load_module_inflow(p: RlcParams, v, dv, P_L, dP_L, di):
    """Flow entering the load module, built from its own parts.

    Sums the capacitor branch and the constant-power branch. With the bus
    current balance this matches the line's outgoing flow to round-off.
    """
    iL = P_L / v
    diL = (dP_L - iL * dv) / v
    iC = p.C * dv
    ddv = (di - diL) / p.C
    cap = port_flow(v, iC, dv, p.C * ddv)
    cpl = port_flow(v, iL, dv, diL)
    return PortFlow(cap.P + cpl.P, cap.Qdot + cpl.Qdot)


def cpl_flow(v, dv, P_L, dP_L):
    """Flow drawn by the constant-power branch alone."""
    iL = P_L / v
    return port_flow(v, iL, dv, (dP_L - iL * dv) / v)


# aggregate linear model: dx_z = A_z x_z + B_z * u_z + B_t Et - B_z * zdot_out
B_Z = np.array([1.0, -1.0])
B_T = np.array([0.0, 4.0])


def aggregate_matrix(tau):
    return np.array([[0.0 if math.isinf(tau) else -1.0 / tau, 0.0], [0.0, 0.0]])


def aggregate_rhs(xz, uz: PortFlow, Et, z_out: PortFlow, tau):
    """``(dE/dt, dp/dt)`` of the aggregate module model.

    ``xz`` is ``(E, p)`` or an EnergyState; ``uz`` the source-side flow;
    ``z_out`` the outgoing port flow; ``tau`` the energy decay constant.
    """
    x = xz.as_array() if isinstance(xz, EnergyState) else np.asarray(xz, dtype=float)
    if x.shape != (2,):
        raise DimensionMismatch("aggregate state must be (E, p)")
    return (aggregate_matrix(tau) @ x + B_Z * uz.as_array() + B_T * Et
            - B_Z * z_out.as_array())


def check_port_conservation(out_flow: PortFlow, in_flow: PortFlow):
    """``(|dP|, |dQdot|)`` between two sides of one node."""
    d = out_flow - in_flow
    return abs(d.P), abs(d.Qdot)


def source_rate_from_flow(uz: PortFlow, u, i, di, i_floor, t=0.0):
    """Source voltage rate that realises ``uz.Qdot`` given ``u``, ``i``, ``di/dt``.

    Raises:
        GuardTripped: ``|i| <= i_floor``, where the map is singular.
    """
    if abs(i) <= i_floor:
        raise GuardTripped(t, f"line current {i:.3g} within floor {i_floor:g}")
    return (u * di - uz.Qdot) / i
