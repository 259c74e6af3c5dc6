import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridflux.components import RlcParams, rlc_rhs
from gridflux.control import (
    AgcState,
    ControllerConfig,
    EnergyGains,
    LineController,
    PdGains,
    PiGains,
    agc_update,
    area_control_error,
    clamp,
    energy_control_single,
    energy_control_two_ts,
    map_to_physical,
    pd_filtered,
    pi_two_loop,
)
from gridflux.core import OdeProblem, integrate
from gridflux.errors import ConfigError, GuardTripped
from gridflux.intvar import PortFlow, aggregate_rhs


def test_pi_feedforward_at_rest():
    u, i_ref, dxv, dxi = pi_two_loop(1.0, 0.0, 1.0, 0.0, 0.0, PiGains(), 2.0)
    assert (u, i_ref, dxv, dxi) == (1.0, 0.0, 0.0, 0.0)


def test_pi_ramp_with_frozen_plant():
    g = PiGains(kp_v=1.0, ki_v=10.0, kp_i=5.0, ki_i=0.0)
    dv, v_ref = 0.02, 1.0
    v, i = v_ref - dv, 0.0

    def rhs(t, x):
        _, _, a, b = pi_two_loop(v, i, v_ref, x[0], x[1], g, 10.0)
        return np.array([a, b])

    sol = integrate(OdeProblem(rhs, [0.0, 0.0], 0.0, 0.5, 0.01))
    u = [pi_two_loop(v, i, v_ref, x[0], x[1], g, 10.0)[0] for x in sol.x]
    np.testing.assert_allclose(np.diff(u) / 0.01, g.ki_v * g.kp_i * dv, rtol=1e-12)


def test_pi_anti_windup():
    u, _, dxv, dxi = pi_two_loop(0.5, 0.0, 1.0, 5.0, 5.0, PiGains(), 2.0)
    assert u == 2.0 and dxv == 0.0 and dxi == 0.0
    u, _, dxv, dxi = pi_two_loop(1.5, 3.0, 1.0, -5.0, -5.0, PiGains(), 2.0)
    assert u == 0.0 and dxv == 0.0 and dxi == 0.0


def test_pd_constant_error():
    g = PdGains()
    u, rate = pd_filtered(0.9, 0.9, 1.0, g, 2.0)
    assert u == pytest.approx(g.kp * 0.1) and rate == 0.0


def test_pd_filter_tracks_ramp():
    g = PdGains(kp=0.0, kd=1.0, tf=1e-3)
    s = 3.0

    def rhs(t, x):
        return np.array([pd_filtered(s * t, x[0], 0.0, g, 1e9)[1]])

    sol = integrate(OdeProblem(rhs, [0.0], 0.0, 5 * g.tf, 1e-5))
    rate = pd_filtered(s * sol.t[-1], sol.x[-1, 0], 0.0, g, 1e9)[1]
    assert abs(rate - s) < 0.01 * s


def test_clamp():
    assert clamp(3.0, 0.0, 2.0) == 2.0
    assert clamp(-1.0, 0.0, 2.0) == 0.0
    assert clamp(1.0, 0.0, 2.0) == 1.0


def test_energy_single_fixed_point_and_feedforward():
    tau, E = 0.05, 0.002
    P_out = 0.6
    assert energy_control_single(E, tau, P_out, E, EnergyGains()).P == pytest.approx(E / tau + P_out)
    g0 = EnergyGains(k_E=0.0)
    assert energy_control_single(0.5, tau, P_out, 0.1, g0).P == pytest.approx(0.5 / tau + P_out)
    # designed equilibrium: nothing to align, nothing to restore
    assert energy_control_single(E, tau, -E / tau, E, EnergyGains()).P == pytest.approx(0.0)


fin = st.floats(-5.0, 5.0)


@settings(max_examples=300, deadline=None)
@given(E=st.floats(0.0, 1.0), p=fin, Et=st.floats(0.0, 2.0), P_out=fin, Q_out=fin,
       p_ref=fin, dp_ref=fin, tau=st.floats(0.01, 1.0))
def test_two_ts_exact_cancellation(E, p, Et, P_out, Q_out, p_ref, dp_ref, tau):
    g = EnergyGains()
    out = PortFlow(P_out, Q_out)
    uz = energy_control_two_ts(E, p, Et, tau, out, p_ref, dp_ref, g)
    dE, dp = aggregate_rhs((E, p), uz, Et, out, tau)
    scale = 1 + abs(E / tau) + abs(P_out) + abs(p_ref) + 4 * Et + abs(Q_out) + g.k_p * (abs(p) + abs(p_ref))
    assert dE == pytest.approx(p_ref, abs=1e-13 * scale)
    assert dp - dp_ref == pytest.approx(-g.k_p * (p - p_ref), abs=1e-13 * scale)


def test_two_ts_holds_equilibrium():
    g = EnergyGains()
    tau, E = 0.05, 0.001
    out = PortFlow(-E / tau, 0.0)
    uz = energy_control_two_ts(E, 0.0, 0.0, tau, out, 0.0, 0.0, g)
    assert aggregate_rhs((E, 0.0), uz, 0.0, out, tau) == pytest.approx([0.0, 0.0])


def test_map_to_physical_examples():
    assert map_to_physical(PortFlow(0, 0), 1.0, 1.0, 0.0, 0.01) == 0.0
    assert map_to_physical(PortFlow(0, 0.2), 1.0, 1.0, 0.5, 0.01) == pytest.approx(0.3)
    with pytest.raises(GuardTripped):
        map_to_physical(PortFlow(0, 0.2), 1.0, 0.0, 0.5, 0.01)


def test_config_validation():
    with pytest.raises(ConfigError):
        ControllerConfig("pid")
    with pytest.raises(ConfigError):
        ControllerConfig("energy_two_ts", energy=EnergyGains(k_E=20, k_p=100))
    with pytest.raises(ConfigError):
        ControllerConfig("pd", v_ref=0.0)
    with pytest.raises(ConfigError):
        ControllerConfig("pi_two_loop", pi=PiGains(kp_v=-1))
    assert ControllerConfig("energy_two_ts").fastest_time_constant == pytest.approx(1 / 400)


@pytest.mark.parametrize("kind", ["none", "pi_two_loop", "pd", "energy_single", "energy_two_ts"])
def test_equilibrium_is_a_fixed_point(kind):
    p = RlcParams()
    ctrl = LineController(ControllerConfig(kind), p)
    plant, xc = ctrl.equilibrium(0.5)
    u, dxc, _ = ctrl(0.0, plant[0], plant[1], xc, (0.5, 0.0, 0.0))
    di, dv = rlc_rhs(p, plant[0], plant[1], u, 0.5)
    assert abs(di) < 1e-9 and abs(dv) < 1e-9
    assert np.all(np.abs(dxc) < 1e-9)
    assert 0.0 <= u <= p.u_max


def test_pd_equilibrium_droops_below_reference():
    ctrl = LineController(ControllerConfig("pd"), RlcParams())
    plant, _ = ctrl.equilibrium(0.5)
    assert 0.5 < plant[1] < 1.0


def test_agc_zero_ace_keeps_set_point():
    s = AgcState(0.3, -0.03)
    assert agc_update(s, 0.0, 0.0, 14.0, 1e-3, 0.1, 1.0) == s


def test_agc_constant_ace_integrates():
    s = AgcState()
    a, n, dt, k_I = 0.02, 7, 0.5, 0.1
    for _ in range(n):
        s = agc_update(s, 0.0, a, 14.0, 1e-3, k_I, dt)
    assert s.omega_ref == pytest.approx(-k_I * a * n * dt)


def test_ace_deadband():
    assert area_control_error(0.1, 5e-4, 14.0, 1e-3) == 0.1
    assert area_control_error(0.1, 2e-3, 14.0, 1e-3) == pytest.approx(0.1 + 0.028)


def test_energy_single_has_no_internal_state():
    ctrl = LineController(ControllerConfig("energy_single"), RlcParams())
    assert ctrl.n_states == 0 and ctrl.state_names == ()
    assert math.isnan(ctrl.last_p_ref)
