"""Physical building blocks.

Generator-turbine-governor (G-T-G) linearised models, single-area network
models built from a DC power-flow graph, the series RLC line feeding a
constant-power load, and deterministic load-disturbance signals.

State conventions
-----------------
A lone G-T-G unit has states ``(theta, omega, P_T, a)``: rotor angle,
frequency deviation (per unit), turbine mechanical power and valve
position. Interaction-variable models drop ``theta`` and append the
electrical power ``P_G`` as a state, giving ``(omega, P_T, a, P_G)`` per
unit; an area stacks all local states first and all ``P_G`` last.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DisconnectedTopology, GuardTripped, InvalidParams


@dataclass(frozen=True)
class GtgParams:
    """Generator-turbine-governor parameters (per unit unless noted).

    Attributes:
        M: inertia constant, > 0.
        damping: damping coefficient; applied as ``-|damping| / M``.
        Tt: turbine time constant in s, > 0.
        Kt: turbine gain.
        Tg: governor time constant in s, > 0.
        r: valve self-feedback gain, > 0.
        omega0: nominal angular frequency in rad/s, > 0.
        droop: speed feedback from ``omega`` into the valve. The classic
            open-loop pattern has none (0.0).
    """

    M: float
    damping: float
    Tt: float
    Kt: float
    Tg: float
    r: float
    omega0: float = 2 * math.pi * 60
    droop: float = 0.0

    def __post_init__(self):
        for name in ("M", "Tt", "Tg", "r", "omega0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be finite and > 0, got {v!r}")
        for name in ("damping", "Kt", "droop"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParams(f"{name} must be finite")
        if self.droop < 0:
            raise InvalidParams("droop must be >= 0")

    @property
    def Kd(self):
        return -abs(self.damping)

    @property
    def response(self):
        """Static frequency response ``dP/d(-omega)`` of one unit."""
        return abs(self.damping) + self.Kt * self.droop / self.r


@dataclass(frozen=True)
class StateSpaceModel:
    """Dense ``dx/dt = A x + B u + D d`` with named coordinates."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    states: tuple
    inputs: tuple = ()
    disturbances: tuple = ()

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or len(self.states) != n:
            raise DimensionMismatch("A must be square and match the state names")
        if self.B.shape != (n, len(self.inputs)):
            raise DimensionMismatch(f"B shape {self.B.shape} vs {n} states, {len(self.inputs)} inputs")
        if self.D.shape != (n, len(self.disturbances)):
            raise DimensionMismatch(f"D shape {self.D.shape} vs {n} states, {len(self.disturbances)} disturbances")

    @property
    def n(self):
        return self.A.shape[0]

    def index(self, name):
        return self.states.index(name)


def gtg_matrix(p: GtgParams):
    """4x4 ``A_LC`` on ``(theta, omega, P_T, a)``."""
    return np.array([
        [0.0, p.omega0, 0.0, 0.0],
        [0.0, p.Kd / p.M, 1.0 / p.M, 0.0],
        [0.0, 0.0, -1.0 / p.Tt, p.Kt / p.Tt],
        [0.0, -p.droop / p.Tg, 0.0, -p.r / p.Tg],
    ])


def power_column(p: GtgParams):
    """Column ``c_M`` through which ``-P_G`` enters the swing equation."""
    return np.array([0.0, 1.0 / p.M, 0.0, 0.0])


def build_gtg_model(p: GtgParams) -> StateSpaceModel:
    """G-T-G unit with inputs ``P_G`` (through ``-c_M``) and ``omega_ref``."""
    B = np.column_stack([-power_column(p), [0.0, 0.0, 0.0, p.droop / p.Tg]])
    return StateSpaceModel(
        A=gtg_matrix(p), B=B, D=np.zeros((4, 0)),
        states=("theta", "omega", "P_T", "a"), inputs=("P_G", "omega_ref"),
    )


def build_standalone_model(p: GtgParams, kP: float = 0.0) -> StateSpaceModel:
    """Unit in interaction-variable coordinates ``(omega, P_T, a, P_G)``.

    ``P_G`` evolves as ``kP * omega + dP_L/dt``; a generator feeding only
    its own load has ``kP = 0``.
    """
    A_lc = gtg_matrix(p)[1:, 1:]
    c = power_column(p)[1:]
    A = np.zeros((4, 4))
    A[:3, :3] = A_lc
    A[:3, 3] = -c
    A[3, 0] = kP
    B = np.array([[0.0], [0.0], [p.droop / p.Tg], [0.0]])
    D = np.array([[0.0], [0.0], [0.0], [1.0]])
    return StateSpaceModel(A, B, D, ("omega", "P_T", "a", "P_G"), ("omega_ref",), ("dP_L",))


@dataclass(frozen=True)
class TieLine:
    """Boundary line from local generator bus ``bus`` to ``neighbor_bus`` of area ``neighbor``."""

    bus: int
    neighbor: int
    neighbor_bus: int
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise InvalidParams("tie susceptance must be > 0")


@dataclass(frozen=True)
class AreaTopology:
    """Single-area network.

    Buses ``0 .. len(generators)-1`` host the generators, in order; any
    further buses up to ``n_bus - 1`` are load buses. ``lines`` holds
    ``(from_bus, to_bus, susceptance)`` triples. ``loads`` gives the base
    load per bus (only its rate of change enters the dynamics).
    """

    generators: tuple
    lines: tuple = ()
    n_bus: Optional[int] = None
    loads: Optional[tuple] = None
    tie_lines: tuple = ()

    @property
    def n_gen(self):
        return len(self.generators)

    @property
    def buses(self):
        return self.n_bus if self.n_bus is not None else self.n_gen


def _laplacian(n, lines):
    Lp = np.zeros((n, n))
    for i, j, b in lines:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise InvalidParams(f"bad line endpoints ({i}, {j})")
        if not b > 0:
            raise InvalidParams(f"line ({i}, {j}) susceptance must be > 0")
        Lp[i, i] += b
        Lp[j, j] += b
        Lp[i, j] -= b
        Lp[j, i] -= b
    return Lp


def _connected(n, lines):
    parent = list(range(n))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for i, j, _ in lines:
        parent[find(i)] = find(j)
    return len({find(k) for k in range(n)}) == 1


def network_matrices(topo: AreaTopology, require_connected=True):
    """Kron-reduced ``(K_P, D_P)`` for an area.

    ``K_P = omega0 * B_red`` where ``B_red`` is the DC-flow Laplacian
    reduced onto the generator buses; its rows sum to zero. ``D_P`` maps
    per-bus load changes to generator power changes; its columns sum to one.
    """
    ng, nb = topo.n_gen, topo.buses
    if ng == 0:
        raise InvalidParams("an area needs at least one generator")
    if nb < ng:
        raise InvalidParams("n_bus must be at least the number of generators")
    w0 = {g.omega0 for g in topo.generators}
    if len(w0) != 1:
        raise InvalidParams("all generators in an area must share omega0")
    Lp = _laplacian(nb, topo.lines)
    if require_connected and nb > 1 and not _connected(nb, topo.lines):
        raise DisconnectedTopology("area network graph is not connected")
    Lgg, Lgl = Lp[:ng, :ng], Lp[:ng, ng:]
    Llg, Lll = Lp[ng:, :ng], Lp[ng:, ng:]
    D_P = np.zeros((ng, nb))
    D_P[:, :ng] = np.eye(ng)
    if nb > ng:
        X = np.linalg.solve(Lll, np.column_stack([Llg, np.eye(nb - ng)]))
        B_red = Lgg - Lgl @ X[:, :ng]
        D_P[:, ng:] = -Lgl @ X[:, ng:]
    else:
        B_red = Lgg
    B_red = 0.5 * (B_red + B_red.T)
    return w0.pop() * B_red, D_P


@dataclass(frozen=True)
class AreaModel(StateSpaceModel):
    K_P: np.ndarray = field(default=None)
    D_P: np.ndarray = field(default=None)
    n_gen: int = 0

    @property
    def pg_slice(self):
        return slice(self.n - self.n_gen, self.n)


def build_area_model(topo: AreaTopology, require_connected=True) -> AreaModel:
    """Area model in interaction-variable coordinates.

    States are ``omega_k, P_T_k, a_k`` for every unit followed by all
    ``P_G_k``. Inputs are the per-unit tie-line export rates ``dF_e`` then
    the governor set points; disturbances are per-bus load rates.
    """
    K_P, D_P = network_matrices(topo, require_connected)
    ng, nb = topo.n_gen, topo.buses
    n = 4 * ng
    A = np.zeros((n, n))
    Bref = np.zeros((n, ng))
    names = []
    for k, g in enumerate(topo.generators):
        s = slice(3 * k, 3 * k + 3)
        A[s, s] = gtg_matrix(g)[1:, 1:]
        A[s, 3 * ng + k] = -power_column(g)[1:]
        Bref[3 * k + 2, k] = g.droop / g.Tg
        names += [f"omega_{k}", f"P_T_{k}", f"a_{k}"]
    names += [f"P_G_{k}" for k in range(ng)]
    A[3 * ng:, 0:3 * ng:3] = K_P
    Bfe = np.zeros((n, ng))
    Bfe[3 * ng:, :] = np.eye(ng)
    D = np.zeros((n, nb))
    D[3 * ng:, :] = D_P
    inputs = tuple(f"dF_e_{k}" for k in range(ng)) + tuple(f"omega_ref_{k}" for k in range(ng))
    return AreaModel(
        A=A, B=np.hstack([Bfe, Bref]), D=D, states=tuple(names), inputs=inputs,
        disturbances=tuple(f"dP_L_{b}" for b in range(nb)), K_P=K_P, D_P=D_P, n_gen=ng,
    )


@dataclass(frozen=True)
class RlcParams:
    """Series R-L line from a controllable source to a bus with capacitance C
    and a constant-power load."""

    R: float = 0.1
    L: float = 0.01
    C: float = 0.04
    u_max: float = 2.0
    v_floor: float = 0.05

    def __post_init__(self):
        for name in ("L", "C", "u_max", "v_floor"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.R) and self.R >= 0):
            raise InvalidParams("R must be finite and >= 0")

    @property
    def tau(self):
        """Energy decay constant ``L / (2R)`` of the inductor (inf if lossless)."""
        return math.inf if self.R == 0 else self.L / (2 * self.R)


def rlc_rhs(p: RlcParams, i, v, u, P_load, t=0.0):
    """``(di/dt, dv/dt)`` for the line current ``i`` and bus voltage ``v``.

    Raises:
        GuardTripped: ``v`` is at or below ``p.v_floor`` (voltage collapse).
    """
    if v <= p.v_floor:
        raise GuardTripped(t, f"bus voltage {v:.4g} at or below floor {p.v_floor:g}")
    di = (u - p.R * i - v) / p.L
    dv = (i - P_load / v) / p.C
    return di, dv


DISTURBANCE_KINDS = ("step", "short_gust", "long_gust", "fluctuation")


@dataclass(frozen=True)
class DisturbanceSignal:
    """Deterministic load profile ``P_L(t) = base + deviation(t)``.

    ``step`` jumps by ``magnitude`` at ``start``. ``short_gust`` is a
    raised-cosine pulse of length ``duration``; ``long_gust`` has
    raised-cosine edges each a quarter of ``duration`` long and a flat top.
    ``fluctuation`` is zero-order-held Gaussian noise (hold ``period``)
    passed through a first-order low-pass with corner ``bandwidth`` Hz,
    scaled so its stationary standard deviation is ``magnitude``; it starts
    at ``start`` from zero.
    """

    kind: str = "step"
    magnitude: float = 0.5
    start: float = 1.0
    duration: float = 1.0
    base: float = 0.5
    seed: int = 42
    bandwidth: float = 5.0
    period: float = 1e-3

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise InvalidParams(f"unknown disturbance kind {self.kind!r}")
        for name in ("magnitude", "start", "duration", "base", "bandwidth", "period"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParams(f"{name} must be finite")
        if self.duration <= 0 or self.bandwidth <= 0 or self.period <= 0:
            raise InvalidParams("duration, bandwidth and period must be > 0")
        if self.kind == "fluctuation" and self.magnitude < 0:
            raise InvalidParams("fluctuation magnitude is a standard deviation, must be >= 0")


_BLOCK = 4096


@lru_cache(maxsize=64)
def _noise_block(seed, block):
    return np.random.default_rng([int(seed), int(block)]).standard_normal(_BLOCK)


class _FilteredNoise:
    """Knot values of the low-pass filtered zero-order-hold noise."""

    def __init__(self, d: DisturbanceSignal):
        self.tau = 1.0 / (2 * math.pi * d.bandwidth)
        self.h = d.period
        a = math.exp(-self.h / self.tau)
        self.decay = a
        self.sigma_w = d.magnitude * math.sqrt((1 + a) / (1 - a))
        self.seed = d.seed
        self.w = np.zeros(0)
        self.y = np.zeros(1)

    def _extend(self, k):
        while len(self.w) <= k:
            b = len(self.w) // _BLOCK
            w = self.sigma_w * _noise_block(self.seed, b)
            y = np.empty(_BLOCK + 1)
            y[0] = self.y[-1]
            for m in range(_BLOCK):
                y[m + 1] = w[m] + (y[m] - w[m]) * self.decay
            self.w = np.concatenate([self.w, w])
            self.y = np.concatenate([self.y, y[1:]])

    def __call__(self, s, s_sel):
        if s_sel < 0:
            return 0.0, 0.0, 0.0
        k = int(math.floor(s_sel / self.h))
        self._extend(k)
        w, yk = self.w[k], self.y[k]
        y = w + (yk - w) * math.exp(-(s - k * self.h) / self.tau)
        dy = (w - y) / self.tau
        return y, dy, -dy / self.tau


_noise_cache = {}


def _noise_for(d):
    key = (d.seed, d.magnitude, d.bandwidth, d.period)
    gen = _noise_cache.get(key)
    if gen is None:
        if len(_noise_cache) > 32:
            _noise_cache.clear()
        gen = _noise_cache[key] = _FilteredNoise(d)
    return gen


def _raised_cosine(s, s_sel, T):
    """Rising edge from 0 to 1 over [0, T]: value, first and second derivative."""
    if s_sel < 0:
        return 0.0, 0.0, 0.0
    if s_sel >= T:
        return 1.0, 0.0, 0.0
    w = math.pi / T
    return 0.5 * (1 - math.cos(w * s)), 0.5 * w * math.sin(w * s), 0.5 * w * w * math.cos(w * s)


def disturbance_rates(d: DisturbanceSignal, t, at=None):
    """``(P_L, dP_L/dt, d2P_L/dt2)`` at time ``t``.

    Every profile is piecewise smooth and right-continuous. ``at`` (default
    ``t``) selects which piece is active; that piece's formula is then
    evaluated at ``t``. Integrators pass the step midpoint so all stages of
    a step see one smooth piece. A step is a jump with zero rate.
    """
    s = t - d.start
    s_sel = s if at is None else at - d.start
    m = d.magnitude
    if d.kind == "step":
        return d.base + (m if s_sel >= 0 else 0.0), 0.0, 0.0
    if d.kind == "short_gust":
        if s_sel < 0 or s_sel >= d.duration:
            return d.base, 0.0, 0.0
        w = 2 * math.pi / d.duration
        return (d.base + 0.5 * m * (1 - math.cos(w * s)),
                0.5 * m * w * math.sin(w * s), 0.5 * m * w * w * math.cos(w * s))
    if d.kind == "long_gust":
        edge = 0.25 * d.duration
        fall = d.duration - edge
        up = _raised_cosine(s, s_sel, edge)
        down = _raised_cosine(s - fall, s_sel - fall, edge)
        return (d.base + m * (up[0] - down[0]), m * (up[1] - down[1]), m * (up[2] - down[2]))
    y, dy, ddy = _noise_for(d)(s, s_sel)
    return d.base + y, dy, ddy


def sample_disturbance(d: DisturbanceSignal, t):
    """``(P_L, dP_L/dt)`` at time ``t``."""
    P, dP, _ = disturbance_rates(d, t)
    return P, dP


def disturbance_jumps(d: DisturbanceSignal, t0, t1) -> Sequence:
    """Jumps ``(time, size)`` of ``P_L`` inside ``(t0, t1]``."""
    if d.kind == "step" and d.magnitude != 0 and t0 < d.start <= t1:
        return [(d.start, d.magnitude)]
    return []
