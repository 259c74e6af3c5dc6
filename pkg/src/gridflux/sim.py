"""Scenario runner.

Scenarios:

- ``rlc_cpl_step`` / ``rlc_cpl_fluct``: series RLC line into a
  constant-power load under one controller, with a load step or a
  band-limited load fluctuation.
- ``two_area_freq``: two areas of G-T-G units joined by a tie line,
  optional AGC, load step and solar-like fluctuation.
- ``stability_sweep``: vector Lyapunov verdicts for the two-area system
  over a range of tie-line susceptances.

Each run integrates on a fixed grid with RK4 and returns a
:class:`Trajectory` plus a :class:`RunSummary`.
"""

from dataclasses import asdict, dataclass, field, replace
import io
import math
from typing import Optional

import numpy as np

from .components import (
    AreaTopology,
    DisturbanceSignal,
    GtgParams,
    RlcParams,
    TieLine,
    build_area_model,
    disturbance_jumps,
    disturbance_rates,
    rlc_rhs,
)
from .control import AgcState, ControllerConfig, LineController, agc_update
from .core import OdeProblem, integrate, step_count
from .errors import ConfigError, GuardTripped, NonFinite
from .intvar import (
    check_port_conservation,
    extract_intvar,
    intvar_rate,
    load_module_inflow,
    port_flow_rlc,
)
from .stability import SubsystemSpec, assess

SCENARIOS = ("rlc_cpl_step", "rlc_cpl_fluct", "two_area_freq", "stability_sweep")
COLLAPSE_V = 0.5


@dataclass(frozen=True)
class TwoAreaParams:
    """Two identical areas; each has two units, one load bus and a tie at unit 0."""

    unit: GtgParams = field(default_factory=lambda: GtgParams(
        M=5.0, damping=2.0, Tt=0.3, Kt=1.0, Tg=0.1, r=1.0, droop=5.0))
    b_internal: float = 10.0
    b_tie: float = 1.0
    step_area: int = 0
    step_size: float = 0.2
    step_time: float = 1.0
    solar_sigma: float = 0.0
    solar_bandwidth: float = 0.5
    solar_period: float = 0.05
    agc: bool = True
    k_I: float = 0.1
    eps: float = 1e-3
    agc_period: float = 1.0
    susceptances: tuple = (0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)

    def topology(self, b_tie=None):
        b = self.b_tie if b_tie is None else b_tie
        lines = ((0, 2, self.b_internal), (1, 2, self.b_internal))
        return [AreaTopology((self.unit, self.unit), lines, n_bus=3, loads=(0.0, 0.0, 1.0),
                             tie_lines=(TieLine(0, 1 - a, 0, b),)) for a in range(2)]


@dataclass(frozen=True)
class Scenario:
    name: str
    dt: float = 1e-4
    tf: float = 10.0
    seed: int = 42
    rlc: RlcParams = field(default_factory=RlcParams)
    controller: ControllerConfig = field(default_factory=lambda: ControllerConfig("energy_two_ts"))
    disturbance: DisturbanceSignal = field(default_factory=DisturbanceSignal)
    two_area: TwoAreaParams = field(default_factory=TwoAreaParams)
    hold: float = 2.0
    stats_from: float = 2.0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ConfigError(f"scenario.name: unknown scenario {self.name!r}")
        if not (self.dt > 0 and self.tf > 0):
            raise ConfigError("scenario.dt and scenario.tf must be > 0")
        try:
            step_count(0.0, self.tf, self.dt)
        except ValueError as exc:
            raise ConfigError(f"scenario.tf: {exc}") from None
        if self.name.startswith("rlc"):
            p = self.rlc
            fast = min(p.L / p.R if p.R > 0 else math.inf, math.sqrt(p.L * p.C))
            if self.dt > fast / 20:
                raise ConfigError(f"scenario.dt={self.dt:g} exceeds plant time scale / 20 = {fast / 20:.3g}")
            if self.dt > self.controller.fastest_time_constant / 5:
                raise ConfigError(f"scenario.dt={self.dt:g} too coarse for the controller time scale")

    def with_seed(self, seed):
        return replace(self, seed=seed, disturbance=replace(self.disturbance, seed=seed))


def default_scenario(name) -> Scenario:
    """Built-in defaults for each scenario name."""
    if name == "rlc_cpl_step":
        return Scenario(name, disturbance=DisturbanceSignal("step", 0.5, 1.0, base=0.5))
    if name == "rlc_cpl_fluct":
        return Scenario(name, disturbance=DisturbanceSignal("fluctuation", 0.05, 0.0, base=0.5,
                                                            bandwidth=5.0, period=1e-3))
    if name == "two_area_freq":
        return Scenario(name, dt=0.01, tf=60.0, two_area=TwoAreaParams(solar_sigma=0.01))
    if name == "stability_sweep":
        return Scenario(name, dt=0.01, tf=1.0)
    raise ConfigError(f"unknown scenario {name!r}")


@dataclass
class Trajectory:
    """Sampled run: ordered named columns on a shared time grid."""

    columns: dict
    events: list = field(default_factory=list)

    @property
    def t(self):
        return self.columns["time"]

    def __getitem__(self, name):
        return self.columns[name]

    def __len__(self):
        return len(self.t)

    def to_csv(self) -> str:
        names = list(self.columns)
        data = np.column_stack([self.columns[n] for n in names])
        buf = io.StringIO()
        buf.write(",".join(names) + "\n")
        for row in data:
            buf.write(",".join(format(x, ".17g") for x in row) + "\n")
        return buf.getvalue()


@dataclass
class AuditResult:
    residual: np.ndarray
    estimate: np.ndarray
    max_residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)


@dataclass
class RunSummary:
    scenario: str
    controller: Optional[str]
    collapsed: bool
    collapse_time: Optional[float]
    settled: bool
    settling_time: Optional[float]
    final_value: Optional[float]
    max_port_dP: Optional[float] = None
    max_port_dQdot: Optional[float] = None
    port_conservation_max: Optional[float] = None
    conservation_residual_max: Optional[float] = None
    conservation_tolerance: Optional[float] = None
    v_std_after: Optional[float] = None
    v_mean_after: Optional[float] = None
    saturation_samples: int = 0
    guard_samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        for k, v in list(out.items()):
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = None
        return out


def audit_conservation(traj: Trajectory, tau, factor=10.0) -> AuditResult:
    """Check the stored-energy balance along a trajectory.

    The residual is the centred difference of ``E`` minus
    ``-E/tau + P_u - P_out``. Its tolerance is ``factor`` times the largest
    truncation estimate ``dt**2/6 * |d3E/dt3|``, where the third derivative
    comes from second differences of the rate column ``p``. ``p`` is
    computed from the states rather than from ``E``, so a corrupted ``E``
    cannot inflate its own tolerance. A round-off floor is added.
    """
    E, p = traj["E"], traj["p"]
    t = traj.t
    n = len(E)
    if n < 3:
        return AuditResult(np.zeros(0), np.zeros(0), 0.0, 0.0)
    dt = t[1] - t[0]
    d2 = (E[2:] - E[:-2]) / (2 * dt)
    k = slice(1, n - 1)
    loss = 0.0 if math.isinf(tau) else E[k] / tau
    rhs = -loss + traj["P_u"][k] - traj["P_out"][k]
    res = d2 - rhs
    floor = 8 * np.finfo(float).eps * max(np.max(np.abs(E)) / dt, np.max(np.abs(p)))
    est = np.abs(p[2:] - 2 * p[1:-1] + p[:-2]) / 6 + floor
    return AuditResult(res, est, float(np.max(np.abs(res))), float(factor * np.max(est)))


def settling(t, y, hold, band=0.05):
    """(settled, settling_time) for the +-band around the final value."""
    final = y[-1]
    outside = np.abs(y - final) > band * abs(final)
    idx = np.nonzero(outside)[0]
    ts = t[0] if idx.size == 0 else t[min(idx[-1] + 1, len(t) - 1)]
    return bool(ts <= t[-1] - hold + 1e-12), float(ts)


def _segments(t0, tf, dt, breaks):
    """Split [t0, tf] at grid-aligned break times."""
    pts = sorted({t0, tf, *[b for b in breaks if t0 < b < tf]})
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        ka, kb = round((a - t0) / dt), round((b - t0) / dt)
        if kb > ka:
            out.append((t0 + ka * dt, t0 + kb * dt))
    return out


# ---------------------------------------------------------------- RLC + CPL


def run_rlc(scn: Scenario):
    p, d = scn.rlc, scn.disturbance
    ctrl = LineController(scn.controller, p)
    plant0, xc0 = ctrl.equilibrium(d.base)
    x0 = np.concatenate([plant0, xc0])
    breaks = [tj for tj, _ in disturbance_jumps(d, 0.0, scn.tf)]
    ts, xs = [], []
    collapse_at = None
    t_start, x = 0.0, x0
    # every stage of a step sees the load piece active at the step midpoint
    mid = [0.0]

    def on_step(tk):
        mid[0] = tk + 0.5 * scn.dt

    def rhs(t, x):
        load = disturbance_rates(d, t, mid[0])
        u, dxc, _ = ctrl(t, x[0], x[1], x[2:], load)
        di, dv = rlc_rhs(p, x[0], x[1], u, load[0], t)
        return np.concatenate([[di, dv], dxc])

    for a, b in _segments(0.0, scn.tf, scn.dt, breaks):
        try:
            sol = integrate(OdeProblem(rhs, x, a, b, scn.dt, on_step=on_step))
        except (GuardTripped, NonFinite) as exc:
            collapse_at = exc.t
            part = exc.trajectory
            if part is not None and len(part) > (1 if ts else 0):
                ts.append(part.t if not ts else part.t[1:])
                xs.append(part.x if not xs else part.x[1:])
            break
        ts.append(sol.t if not ts else sol.t[1:])
        xs.append(sol.x if not xs else sol.x[1:])
        x = sol.x[-1]
    t = np.concatenate(ts)
    X = np.vstack(xs)
    traj = _rlc_columns(scn, ctrl, t, X)
    return traj, _rlc_summary(scn, traj, collapse_at)


def _rlc_columns(scn, ctrl, t, X):
    p, d = scn.rlc, scn.disturbance
    n = len(t)
    u = np.empty(n)
    dxu = np.full(n, np.nan)
    p_ref = np.full(n, np.nan)
    load = np.empty((n, 3))
    for k in range(n):
        load[k] = disturbance_rates(d, t[k])
        uk, dxc, _ = ctrl(t[k], X[k, 0], X[k, 1], X[k, 2:], load[k])
        u[k] = uk
        if scn.controller.kind == "energy_two_ts":
            dxu[k] = dxc[0]
            p_ref[k] = ctrl.last_p_ref
    i, v = X[:, 0], X[:, 1]
    P_L, dP_L = load[:, 0], load[:, 1]
    di = (u - p.R * i - v) / p.L
    dv = (i - P_L / v) / p.C
    if scn.controller.kind != "energy_two_ts":
        dxu = np.gradient(u, t) if n > 1 else np.zeros(n)
    cols = {"time": t, "i_L1": i, "v1": v}
    for k, name in enumerate(ctrl.state_names):
        cols[name] = X[:, 2 + k]
    iL = P_L / v
    diL = (dP_L - iL * dv) / v
    cols.update({
        "u1": u,
        "P_L": P_L,
        "dP_L": dP_L,
        "E": 0.5 * p.L * i * i,
        "p": p.L * i * di,
        "E_t": 0.5 * p.L * di * di,
        "P_out": v * i,
        "Qdot_out": v * di - i * dv,
        "P_u": u * i,
        "Qdot_u": u * di - i * dxu,
        "P_load": v * iL,
        "Qdot_load": v * diL - iL * dv,
    })
    if scn.controller.kind == "energy_two_ts":
        cols["p_ref"] = p_ref
    cols["res_P"] = cols["P_out"] - cols["P_load"]
    cols["res_Qdot"] = cols["Qdot_out"] - cols["Qdot_load"]
    traj = Trajectory(cols)
    eps = 1e-12
    sat = (u <= eps) | (u >= p.u_max - eps)
    for k in np.nonzero(sat & ~np.r_[False, sat[:-1]])[0]:
        traj.events.append((float(t[k]), "saturation", f"u1={u[k]:.6g}"))
    if scn.controller.kind.startswith("energy"):
        low = np.abs(i) <= scn.controller.energy.i_floor
        for k in np.nonzero(low & ~np.r_[False, low[:-1]])[0]:
            traj.events.append((float(t[k]), "guard", "line current within floor"))
    return traj


def port_conservation_max(scn: Scenario, traj: Trajectory):
    """Largest mismatch between the line's outgoing flow and the load
    module's own inflow at the shared bus."""
    p = scn.rlc
    worst = 0.0
    t, i, v = traj.t, traj["i_L1"], traj["v1"]
    u, P_L, dP_L = traj["u1"], traj["P_L"], traj["dP_L"]
    for k in range(len(t)):
        di = (u[k] - p.R * i[k] - v[k]) / p.L
        dv = (i[k] - P_L[k] / v[k]) / p.C
        out = port_flow_rlc(i[k], v[k], di, dv)
        inflow = load_module_inflow(p, v[k], dv, P_L[k], dP_L[k], di)
        dP, dQ = check_port_conservation(out, inflow)
        scale = 1.0 + abs(out.P) + abs(out.Qdot)
        worst = max(worst, dP / scale, dQ / scale)
    return worst


def _rlc_summary(scn, traj, collapse_at):
    t, v = traj.t, traj["v1"]
    below = np.nonzero(v < COLLAPSE_V)[0]
    collapsed = collapse_at is not None or below.size > 0
    ctime = None
    if below.size:
        ctime = float(t[below[0]])
    if collapse_at is not None:
        ctime = collapse_at if ctime is None else min(ctime, collapse_at)
        traj.events.append((float(collapse_at), "guard_trip", "integration stopped"))
    if below.size:
        traj.events.append((float(t[below[0]]), "collapse", f"v1 < {COLLAPSE_V:g}"))
    for tj, size in disturbance_jumps(scn.disturbance, 0.0, scn.tf):
        traj.events.append((float(tj), "load_step", f"P_L += {size:g}"))
    traj.events.sort(key=lambda e: e[0])
    settled, ts = (False, None)
    if not collapsed:
        settled, ts = settling(t, v, scn.hold)
    tail = t >= t[-1] - scn.hold
    after = t >= scn.stats_from
    audit = audit_conservation(traj, scn.rlc.tau)
    s = RunSummary(
        scenario=scn.name,
        controller=scn.controller.kind,
        collapsed=collapsed,
        collapse_time=ctime,
        settled=settled,
        settling_time=ts,
        final_value=float(v[-1]),
        max_port_dP=float(np.max(np.abs(traj["res_P"][tail]))),
        max_port_dQdot=float(np.max(np.abs(traj["res_Qdot"][tail]))),
        port_conservation_max=port_conservation_max(scn, traj),
        conservation_residual_max=audit.max_residual,
        conservation_tolerance=audit.tolerance,
        v_std_after=float(np.std(v[after])) if after.any() and not collapsed else None,
        v_mean_after=float(np.mean(v[after])) if after.any() and not collapsed else None,
        saturation_samples=sum(1 for e in traj.events if e[1] == "saturation"),
        guard_samples=sum(1 for e in traj.events if e[1] == "guard"),
    )
    return s


# ---------------------------------------------------------------- two areas


@dataclass
class TwoAreaSystem:
    """Assembled linear two-area model with a tie-line flow state."""

    A: np.ndarray
    B_ref: np.ndarray
    D: np.ndarray
    areas: list
    transforms: list
    offsets: list
    tie_index: int
    tie_rate: np.ndarray
    names: list


def build_two_area(tp: TwoAreaParams, b_tie=None) -> TwoAreaSystem:
    topos = tp.topology(b_tie)
    areas = [build_area_model(tp_) for tp_ in topos]
    sizes = [m.n for m in areas]
    offs = [0, sizes[0], sizes[0] + sizes[1]]
    n = offs[-1] + 1
    A = np.zeros((n, n))
    ng = [m.n_gen for m in areas]
    B_ref = np.zeros((n, sum(ng)))
    nb = [m.D.shape[1] for m in areas]
    D = np.zeros((n, sum(nb)))
    names = []
    col_u, col_d = 0, 0
    for a, m in enumerate(areas):
        s = slice(offs[a], offs[a + 1])
        A[s, s] = m.A
        B_ref[s, col_u:col_u + m.n_gen] = m.B[:, m.n_gen:]
        D[s, col_d:col_d + nb[a]] = m.D
        col_u += m.n_gen
        col_d += nb[a]
        names += [f"area{a}.{x}" for x in m.states]
    tie = topos[0].tie_lines[0]
    w0 = tp.unit.omega0
    rate = np.zeros(n)
    rate[offs[0] + 3 * tie.bus] = tie.b * w0
    rate[offs[1] + 3 * tie.neighbor_bus] = -tie.b * w0
    k = n - 1
    A[k] = rate
    # exports enter each area's generator power at its boundary unit
    A[offs[0] + areas[0].pg_slice.start + tie.bus] += rate
    A[offs[1] + areas[1].pg_slice.start + tie.neighbor_bus] -= rate
    names.append("F_tie")
    transforms = [extract_intvar(m) for m in areas]
    return TwoAreaSystem(A, B_ref, D, areas, transforms, offs, k, rate, names)


def two_area_disturbances(scn: Scenario):
    tp = scn.two_area
    step = DisturbanceSignal("step", tp.step_size, tp.step_time, base=0.0)
    solar = None
    if tp.solar_sigma > 0:
        solar = DisturbanceSignal("fluctuation", tp.solar_sigma, 0.0, base=0.0, seed=scn.seed,
                                  bandwidth=tp.solar_bandwidth, period=tp.solar_period)
    return step, solar


def run_two_area(scn: Scenario):
    tp = scn.two_area
    sysm = build_two_area(tp)
    n = sysm.A.shape[0]
    areas, T = sysm.areas, sysm.transforms
    ng = [m.n_gen for m in areas]
    nbus = [m.D.shape[1] for m in areas]
    load_col = [nbus[0] - 1, nbus[0] + nbus[1] - 1]
    step, solar = two_area_disturbances(scn)
    beta = [sum(g.response for g in tp.topology()[a].generators) for a in range(2)]
    n_aug = n + 2

    mid = [0.0]

    def on_step(tk):
        mid[0] = tk + 0.5 * scn.dt

    def pl_rates(t, at=None):
        dP = np.zeros(sum(nbus))
        P = np.zeros(sum(nbus))
        P[load_col[tp.step_area]] += disturbance_rates(step, t, at)[0]
        if solar is not None:
            y, dy, _ = disturbance_rates(solar, t, at)
            # solar output offsets load in area 0
            P[load_col[0]] -= y
            dP[load_col[0]] -= dy
        return P, dP

    def fe_dot(x):
        r = sysm.tie_rate @ x
        return [np.eye(ng[0])[0] * r, -np.eye(ng[1])[0] * r]

    agc = [AgcState(), AgcState()]

    def make_rhs(omega_ref):
        u = np.repeat(omega_ref, ng)

        def rhs(t, xa):
            x = xa[:n]
            _, dP = pl_rates(t, mid[0])
            dx = sysm.A @ x + sysm.B_ref @ u + sysm.D @ dP
            fe = fe_dot(x)
            zq = [intvar_rate(T[a], fe[a], areas[a].D_P, dP[a * nbus[0]:a * nbus[0] + nbus[a]])[0]
                  for a in range(2)]
            return np.concatenate([dx, zq])

        return rhs

    breaks = [step.start]
    if tp.agc:
        breaks += list(np.arange(tp.agc_period, scn.tf, tp.agc_period))
    x = np.zeros(n_aug)
    ts, xs, refs = [], [], []
    for a_, b_ in _segments(0.0, scn.tf, scn.dt, breaks):
        for tj, size in disturbance_jumps(step, a_ - scn.dt / 2, a_ + scn.dt / 2):
            jump = np.zeros(sum(nbus))
            jump[load_col[tp.step_area]] = size
            x[:n] += sysm.D @ jump
            area = tp.step_area
            m = areas[area]
            x[n + area] += (T[area].T[:, m.pg_slice] @ (m.D_P @ jump[area * nbus[0]:area * nbus[0] + nbus[area]]))[0]
        omega_ref = np.array([s.omega_ref for s in agc])
        sol = integrate(OdeProblem(make_rhs(omega_ref), x, a_, b_, scn.dt, on_step=on_step))
        first = not ts
        ts.append(sol.t if first else sol.t[1:])
        xs.append(sol.x if first else sol.x[1:])
        refs.append(np.tile(omega_ref, (len(sol.t) - (0 if first else 1), 1)))
        x = sol.x[-1].copy()
        if tp.agc:
            fd, tie = _area_measurements(sysm, x[:n])
            agc = [agc_update(agc[a], fd[a], tie[a], beta[a], tp.eps, tp.k_I, b_ - a_) for a in range(2)]
    t = np.concatenate(ts)
    X = np.vstack(xs)
    R = np.vstack(refs)
    cols = {"time": t}
    for k, name in enumerate(sysm.names):
        cols[name] = X[:, k]
    cols["omega_ref_0"] = R[:, 0]
    cols["omega_ref_1"] = R[:, 1]
    for a in range(2):
        xa = X[:, sysm.offsets[a]:sysm.offsets[a + 1]]
        cols[f"z_{a}"] = T[a].apply(xa)[:, 0]
        cols[f"z_int_{a}"] = X[:, n + a]
        cols[f"freq_dev_{a}"] = np.mean(xa[:, 0:3 * ng[a]:3], axis=1)
    traj = Trajectory(cols)
    for tj, size in disturbance_jumps(step, 0.0, scn.tf):
        traj.events.append((float(tj), "load_step", f"area {tp.step_area} P_L += {size:g}"))
    tail = t >= t[-1] - scn.hold
    fdev = np.maximum(np.abs(cols["freq_dev_0"]), np.abs(cols["freq_dev_1"]))
    settled = bool(np.all(fdev[tail] <= tp.eps))
    outside = np.nonzero(fdev > tp.eps)[0]
    ts_ = float(t[min(outside[-1] + 1, len(t) - 1)]) if outside.size else 0.0
    zerr = max(float(np.max(np.abs(cols[f"z_{a}"] - cols[f"z_int_{a}"]))) for a in range(2))
    summary = RunSummary(
        scenario=scn.name, controller="agc" if tp.agc else "none",
        collapsed=False, collapse_time=None, settled=settled,
        settling_time=ts_ if settled else None,
        final_value=float(fdev[-1]),
        extra={
            "final_freq_dev": [float(cols["freq_dev_0"][-1]), float(cols["freq_dev_1"][-1])],
            "final_tie_dev": float(cols["F_tie"][-1]),
            "intvar_integral_error": zerr,
            "beta": beta,
        },
    )
    return traj, summary


def _area_measurements(sysm: TwoAreaSystem, x):
    fd, tie = [], []
    for a, m in enumerate(sysm.areas):
        xa = x[sysm.offsets[a]:sysm.offsets[a + 1]]
        fd.append(float(np.mean(xa[0:3 * m.n_gen:3])))
    F = float(x[sysm.tie_index])
    return fd, [F, -F]


# ---------------------------------------------------------------- stability


def two_area_subsystems(tp: TwoAreaParams, b_tie):
    """Split the two-area model at the tie line.

    The tie-flow state only integrates the frequency difference and feeds
    nothing back, so it is left out. Total generation of both areas is
    conserved, which puts a zero eigenvalue in any model of the pair; that
    direction is removed by eliminating the last unit's power of area 1
    through the conservation constraint.

    Returns ``(subsystems, couplings, A_red)``.
    """
    sysm = build_two_area(tp, b_tie)
    n = sysm.tie_index
    A = sysm.A[:n, :n]
    glob = np.zeros(n)
    for a, m in enumerate(sysm.areas):
        glob[sysm.offsets[a] + m.pg_slice.start: sysm.offsets[a] + m.pg_slice.stop] = 1.0
    elim = n - 1
    keep = list(range(n - 1))
    # columns: basis of {x : glob x = 0} in the kept coordinates
    N = np.zeros((n, n - 1))
    N[keep, keep] = 1.0
    N[elim, :] = -glob[keep]
    A_red = A[keep] @ N
    k0 = sysm.offsets[1]
    i0, i1 = np.arange(k0), np.arange(k0, n - 1)
    subs = [SubsystemSpec(A_red[np.ix_(i0, i0)], name="area0"),
            SubsystemSpec(A_red[np.ix_(i1, i1)], name="area1")]
    couplings = {(0, 1): A_red[np.ix_(i0, i1)], (1, 0): A_red[np.ix_(i1, i0)]}
    return subs, couplings, A_red


def stability_sweep(tp: TwoAreaParams, susceptances=None):
    """Verdict and full-spectrum oracle for each tie susceptance."""
    rows = []
    for b in (tp.susceptances if susceptances is None else susceptances):
        subs, cpl, A_red = two_area_subsystems(tp, b)
        rep = assess(subs, cpl, oracle=False)
        rep.oracle_max_real = float(np.max(np.linalg.eigvals(A_red).real))
        rows.append((float(b), rep))
    return rows


def run(scn: Scenario):
    """Run a time-domain scenario; returns ``(Trajectory, RunSummary)``."""
    if scn.name.startswith("rlc"):
        return run_rlc(scn)
    if scn.name == "two_area_freq":
        return run_two_area(scn)
    raise ConfigError("stability_sweep is not a time-domain scenario; use the stability command")


__all__ = [
    "Scenario", "TwoAreaParams", "Trajectory", "RunSummary", "AuditResult", "default_scenario",
    "run", "run_rlc", "run_two_area", "audit_conservation", "settling", "stability_sweep",
    "two_area_subsystems", "build_two_area", "port_conservation_max",
]
