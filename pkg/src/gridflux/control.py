"""Controllers for the line-fed constant-power load, and area AGC.

The line controllers are continuous-time laws. Their internal states (PI
integrators, the PD derivative filter, the source voltage of the
two-time-scale law) are integrated together with the plant. Source
voltages are clamped to ``[0, u_max]``; loads are passed as the tuple
``(P_L, dP_L/dt, d2P_L/dt2)``.

The AGC is sampled: it integrates the area control error once per period.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from .components import RlcParams
from .errors import ConfigError, GuardTripped
from .intvar import PortFlow, source_rate_from_flow

KINDS = ("pi_two_loop", "pd", "energy_single", "energy_two_ts", "none")


@dataclass(frozen=True)
class PiGains:
    kp_v: float = 1.0
    ki_v: float = 10.0
    kp_i: float = 5.0
    ki_i: float = 100.0


@dataclass(frozen=True)
class PdGains:
    kp: float = 5.0
    kd: float = 0.05
    tf: float = 1e-3


@dataclass(frozen=True)
class EnergyGains:
    """``k_E`` restores stored energy, ``k_p`` tracks the energy rate.

    ``k_p / k_E`` must be at least ``min_separation``. The same ``k_E``
    restores the bus capacitor energy to its set point.
    """

    k_E: float = 20.0
    k_p: float = 400.0
    i_floor: float = 1e-2
    min_separation: float = 10.0


@dataclass(frozen=True)
class ControllerConfig:
    kind: str
    v_ref: float = 1.0
    pi: PiGains = field(default_factory=PiGains)
    pd: PdGains = field(default_factory=PdGains)
    energy: EnergyGains = field(default_factory=EnergyGains)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"controller.kind: unknown controller {self.kind!r}")
        if not self.v_ref > 0:
            raise ConfigError("controller.v_ref must be > 0")
        for group in (self.pi, self.pd, self.energy):
            for k, v in vars(group).items():
                if not (math.isfinite(v) and v >= 0):
                    raise ConfigError(f"controller gain {k} must be finite and >= 0")
        if self.pd.tf <= 0:
            raise ConfigError("controller.pd.tf must be > 0")
        e = self.energy
        if self.kind.startswith("energy"):
            if e.k_E <= 0 or e.i_floor <= 0:
                raise ConfigError("energy gains k_E and i_floor must be > 0")
            if self.kind == "energy_two_ts" and e.k_p < e.min_separation * e.k_E:
                raise ConfigError(
                    f"energy.k_p/k_E = {e.k_p / e.k_E:.3g} below required separation {e.min_separation:g}")

    @property
    def fastest_time_constant(self):
        """Shortest controller time scale, for step-size checks."""
        if self.kind == "pd":
            return self.pd.tf
        if self.kind == "energy_two_ts":
            return 1.0 / self.energy.k_p
        if self.kind == "energy_single":
            return 1.0 / self.energy.k_E
        if self.kind == "pi_two_loop" and self.pi.ki_i > 0:
            return min(1.0 / self.pi.ki_i, 1.0 / max(self.pi.ki_v, 1e-300))
        return math.inf


def clamp(u, lo, hi):
    return lo if u < lo else hi if u > hi else u


def pi_two_loop(v, i, v_ref, x_v, x_i, g: PiGains, u_max):
    """Cascaded PI: outer voltage loop sets a current reference.

    Returns ``(u, i_ref, dx_v, dx_i)``. An integrator stops when the output
    is saturated and its error would push further into saturation.
    """
    e_v = v_ref - v
    i_ref = g.kp_v * e_v + x_v
    e_i = i_ref - i
    raw = v_ref + g.kp_i * e_i + x_i
    u = clamp(raw, 0.0, u_max)
    high, low = raw > u_max, raw < 0.0
    dx_i = 0.0 if (high and e_i > 0) or (low and e_i < 0) else g.ki_i * e_i
    dx_v = 0.0 if (high and e_v > 0) or (low and e_v < 0) else g.ki_v * e_v
    return u, i_ref, dx_v, dx_i


def pd_filtered(v, v_f, v_ref, g: PdGains, u_max):
    """PD on the voltage error with a first-order derivative filter.

    ``v_f`` follows ``v`` with time constant ``tf``; ``(v - v_f)/tf`` is the
    filtered voltage rate. Returns ``(u, dv_f)``.
    """
    rate = (v - v_f) / g.tf
    u = clamp(g.kp * (v_ref - v) - g.kd * rate, 0.0, u_max)
    return u, rate


@dataclass(frozen=True)
class LoadReference:
    """Power the load module asks for, with capacitor energy restoration.

    ``P_ref = P_L + k_E (C v_ref^2 / 2 - C v^2 / 2)`` and its first two
    time derivatives.
    """

    P: float
    dP: float
    ddP: float


def load_reference(p: RlcParams, v, dv, ddv, load, k_E, v_ref):
    P_L, dP_L, ddP_L = load
    C = p.C
    return LoadReference(
        P_L + k_E * 0.5 * C * (v_ref * v_ref - v * v),
        dP_L - k_E * C * v * dv,
        ddP_L - k_E * C * (dv * dv + v * ddv),
    )


def energy_control_single(E, tau, P_out, E_ref, g: EnergyGains):
    """Source power that drives ``E`` to ``E_ref`` at rate ``k_E``."""
    loss = 0.0 if math.isinf(tau) else E / tau
    return PortFlow(loss + P_out - g.k_E * (E - E_ref), 0.0)


@dataclass(frozen=True)
class EnergyTargets:
    """Energy reference ``E_ref`` with its first two derivatives."""

    E: float
    dE: float = 0.0
    ddE: float = 0.0


def energy_rate_reference(E, dE, target: EnergyTargets, P_out, dP_out, ref: LoadReference, g: EnergyGains):
    """``(p_ref, dp_ref)`` for the fast loop.

    ``p_ref`` follows the energy reference rate, restores ``E`` at rate
    ``k_E`` and aligns the outgoing power with what the load asks for.
    """
    p_ref = target.dE - g.k_E * (E - target.E) - (P_out - ref.P)
    dp_ref = target.ddE - g.k_E * (dE - target.dE) - (dP_out - ref.dP)
    return p_ref, dp_ref


def energy_control_two_ts(E, p, Et, tau, out: PortFlow, p_ref, dp_ref, g: EnergyGains):
    """Source flow ``(P_u, Qdot_u)`` for the two-time-scale law.

    ``P_u`` makes ``dE/dt = p_ref``; ``Qdot_u`` makes
    ``d(p - p_ref)/dt = -k_p (p - p_ref)`` in the aggregate model.
    """
    loss = 0.0 if math.isinf(tau) else E / tau
    P_u = p_ref + loss + out.P
    Q_u = 4.0 * Et + out.Qdot + g.k_p * (p - p_ref) - dp_ref
    return PortFlow(P_u, Q_u)


def map_to_physical(uz: PortFlow, u, i, di, i_floor, t=0.0):
    """Source voltage rate ``du/dt`` that realises ``uz``."""
    return source_rate_from_flow(uz, u, i, di, i_floor, t)


class LineController:
    """Binds a control law to line parameters; used by the simulator."""

    def __init__(self, cfg: ControllerConfig, plant: RlcParams):
        self.cfg = cfg
        self.p = plant
        self.n_states = {"pi_two_loop": 2, "pd": 1, "energy_two_ts": 1}.get(cfg.kind, 0)
        self.state_names = {
            "pi_two_loop": ("x_v", "x_i"), "pd": ("v_f",), "energy_two_ts": ("u_state",),
        }.get(cfg.kind, ())
        self._u_hold = None
        self.last_p_ref = math.nan

    def equilibrium(self, P0):
        """Plant and controller state at rest with constant load ``P0``."""
        p, cfg = self.p, self.cfg
        if cfg.kind == "pd":
            g = cfg.pd

            def f(v):
                return g.kp * (cfg.v_ref - v) - v - p.R * P0 / v

            # f is concave with its peak at lo; the upper root is the stable one
            lo = max(math.sqrt(p.R * P0 / (g.kp + 1.0)), p.v_floor)
            hi = cfg.v_ref
            if f(lo) <= 0 or f(hi) >= 0:
                raise ConfigError("PD controller has no operating point for the initial load")
            v = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        else:
            v = cfg.v_ref
        i = P0 / v
        u = v + p.R * i
        if not 0 <= u <= p.u_max:
            raise ConfigError("initial operating point violates the source limit")
        xc = {
            "pi_two_loop": [i, u - cfg.v_ref], "pd": [v], "energy_two_ts": [u],
        }.get(cfg.kind, [])
        self._u_hold = u
        return np.array([i, v]), np.array(xc, dtype=float)

    def __call__(self, t, i, v, xc, load):
        """Return ``(u, dxc, dv)`` where ``dv`` is the bus voltage rate
        implied by ``u`` (reused by the caller)."""
        p, cfg = self.p, self.cfg
        P_L = load[0]
        dv = (i - P_L / v) / p.C
        kind = cfg.kind
        if kind == "none":
            return self._u_hold, np.zeros(0), dv
        if kind == "pi_two_loop":
            u, _, dxv, dxi = pi_two_loop(v, i, cfg.v_ref, xc[0], xc[1], cfg.pi, p.u_max)
            return u, np.array([dxv, dxi]), dv
        if kind == "pd":
            u, rate = pd_filtered(v, xc[0], cfg.v_ref, cfg.pd, p.u_max)
            return u, np.array([rate]), dv
        g = cfg.energy
        if kind == "energy_single":
            ddv = 0.0
            ref = load_reference(p, v, dv, ddv, load, g.k_E, cfg.v_ref)
            E = 0.5 * p.L * i * i
            E_ref = 0.5 * p.L * (ref.P / v) ** 2
            uz = energy_control_single(E, p.tau, v * i, E_ref, g)
            i_eff = i if abs(i) > g.i_floor else math.copysign(g.i_floor, i if i else 1.0)
            return clamp(uz.P / i_eff, 0.0, p.u_max), np.zeros(0), dv
        return self._two_ts(t, i, v, xc, load, dv)

    def _two_ts(self, t, i, v, xc, load, dv):
        p, cfg, g = self.p, self.cfg, self.cfg.energy
        u = clamp(xc[0], 0.0, p.u_max)
        P_L, dP_L, _ = load
        di = (u - p.R * i - v) / p.L
        iL = P_L / v
        diL = (dP_L - iL * dv) / v
        ddv = (di - diL) / p.C
        ref = load_reference(p, v, dv, ddv, load, g.k_E, cfg.v_ref)
        i_ref = ref.P / v
        di_ref = (ref.dP - i_ref * dv) / v
        ddi_ref = (ref.ddP - 2 * di_ref * dv - i_ref * ddv) / v
        target = EnergyTargets(
            0.5 * p.L * i_ref * i_ref,
            p.L * i_ref * di_ref,
            p.L * (di_ref * di_ref + i_ref * ddi_ref),
        )
        E = 0.5 * p.L * i * i
        e_rate = p.L * i * di
        P_out = v * i
        dP_out = dv * i + v * di
        p_ref, dp_ref = energy_rate_reference(E, e_rate, target, P_out, dP_out, ref, g)
        self.last_p_ref = p_ref
        out = PortFlow(P_out, v * di - i * dv)
        uz = energy_control_two_ts(E, e_rate, 0.5 * p.L * di * di, p.tau, out, p_ref, dp_ref, g)
        try:
            du = map_to_physical(uz, u, i, di, g.i_floor, t)
        except GuardTripped:
            du = 0.0
        if (u >= p.u_max and du > 0) or (u <= 0 and du < 0):
            du = 0.0
        return u, np.array([du]), dv


@dataclass
class AgcState:
    """Per-area AGC accumulator; ``omega_ref`` is the governor set point."""

    integral: float = 0.0
    omega_ref: float = 0.0


def area_control_error(tie_dev, freq_dev, beta, eps):
    """Tie-line export deviation plus biased frequency deviation.

    Frequency deviations inside ``eps`` are ignored.
    """
    f = 0.0 if abs(freq_dev) < eps else freq_dev
    return tie_dev + beta * f


def agc_update(state: AgcState, freq_dev, tie_dev, beta, eps, k_I, dt) -> AgcState:
    """One sampled AGC update (integral action on the area control error)."""
    ace = area_control_error(tie_dev, freq_dev, beta, eps)
    integral = state.integral + ace * dt
    return AgcState(integral, -k_I * integral)
