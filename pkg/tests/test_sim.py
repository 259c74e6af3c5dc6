from dataclasses import replace
import math

import numpy as np
import pytest

from gridflux.components import RlcParams
from gridflux.control import ControllerConfig
from gridflux.errors import ConfigError
from gridflux.sim import (
    Scenario,
    TwoAreaParams,
    Trajectory,
    audit_conservation,
    default_scenario,
    run,
    settling,
)


def rlc(kind, tf=3.0, **dist):
    scn = default_scenario("rlc_cpl_step")
    d = replace(scn.disturbance, **dist) if dist else scn.disturbance
    return replace(scn, tf=tf, controller=ControllerConfig(kind), disturbance=d)


def two_area(**kw):
    scn = default_scenario("two_area_freq")
    return replace(scn, tf=kw.pop("tf", 60.0), two_area=replace(scn.two_area, **kw))


@pytest.fixture(scope="module")
def two_ts_step():
    return run(rlc("energy_two_ts", tf=4.0))


def test_flat_trajectory_at_rest():
    # settling needs the hold window (2 s) inside the run
    traj, s = run(rlc("none", tf=2.5, magnitude=0.0))
    assert np.ptp(traj["v1"]) < 1e-12 and np.ptp(traj["i_L1"]) < 1e-12
    assert s.settled and s.settling_time == 0.0
    assert traj.events == []


def test_pi_collapses():
    _, s = run(rlc("pi_two_loop"))
    assert s.collapsed and not s.settled
    assert 1.0 < s.collapse_time < 3.0


def test_two_ts_settles(two_ts_step):
    traj, s = two_ts_step
    assert s.settled and not s.collapsed
    assert s.max_port_dP < 1e-3 and s.max_port_dQdot < 1e-3
    assert abs(traj["v1"][-1] - 1.0) < 1e-6


def test_csv_schema(two_ts_step):
    traj, _ = two_ts_step
    names = list(traj.columns)
    assert names[:4] == ["time", "i_L1", "v1", "u_state"]
    for col in ("u1", "E", "p", "E_t", "P_out", "Qdot_out", "P_u", "Qdot_u", "res_P", "res_Qdot"):
        assert col in names
    assert names.index("E") < names.index("P_out")
    lengths = {len(v) for v in traj.columns.values()}
    assert lengths == {len(traj)}
    dt = np.diff(traj.t)
    np.testing.assert_allclose(dt, 1e-4, rtol=1e-9)


def test_csv_round_trips_doubles(two_ts_step):
    traj, _ = two_ts_step
    lines = traj.to_csv().splitlines()
    row = [float(x) for x in lines[12345].split(",")]
    assert row == [float(traj.columns[c][12344]) for c in traj.columns]


def test_saturation_safety():
    for kind in ("pi_two_loop", "pd", "energy_single", "energy_two_ts"):
        traj, _ = run(rlc(kind, tf=2.0))
        assert np.all((traj["u1"] >= 0) & (traj["u1"] <= RlcParams().u_max))


def test_port_conservation_every_sample(two_ts_step):
    _, s = two_ts_step
    assert s.port_conservation_max <= 1e-9


def test_energy_audit_passes(two_ts_step):
    traj, _ = two_ts_step
    assert audit_conservation(traj, RlcParams().tau).passed


def test_audit_on_analytic_decay():
    tau, dt = 0.05, 1e-4
    t = np.arange(0, 0.2, dt)
    E = 0.3 * np.exp(-t / tau)
    zero = np.zeros_like(t)
    traj = Trajectory({"time": t, "E": E, "p": -E / tau, "P_u": zero, "P_out": zero})
    res = audit_conservation(traj, tau)
    assert res.passed
    bad = E.copy()
    bad[1000] += 1e-6
    corrupted = Trajectory({"time": t, "E": bad, "p": -E / tau, "P_u": zero, "P_out": zero})
    assert not audit_conservation(corrupted, tau).passed


def test_determinism():
    scn = replace(default_scenario("rlc_cpl_fluct"), tf=0.5)
    a, sa = run(scn)
    b, sb = run(scn)
    assert a.to_csv() == b.to_csv()
    assert sa.to_dict() == sb.to_dict()
    c, _ = run(scn.with_seed(7))
    assert c.to_csv() != a.to_csv()


def test_grid_refinement():
    scn = rlc("pd", tf=1.5)
    coarse, _ = run(scn)
    fine, _ = run(replace(scn, dt=scn.dt / 2))
    for col in ("i_L1", "v1"):
        a, b = coarse[col][-1], fine[col][-1]
        assert abs(a - b) <= 1e-5 * abs(b)


def test_collapse_monotone_in_step_size():
    outcomes = [run(rlc("pi_two_loop", magnitude=m))[1].collapsed for m in (0.05, 0.1, 0.2, 0.35, 0.5)]
    first = outcomes.index(True) if True in outcomes else len(outcomes)
    assert all(outcomes[first:])


def test_events_on_grid():
    traj, s = run(rlc("pi_two_loop"))
    kinds = [e[1] for e in traj.events]
    assert "load_step" in kinds and "collapse" in kinds
    for t, _, _ in traj.events:
        assert abs(t / 1e-4 - round(t / 1e-4)) < 1e-6


def test_settling_helper():
    t = np.linspace(0, 10, 101)
    y = np.where(t < 3, 0.0, 1.0)
    ok, ts = settling(t, y, hold=2.0)
    assert ok and ts == pytest.approx(3.0)
    ok, _ = settling(t, np.sin(t) + 2, hold=2.0)
    assert not ok


def test_scenario_validation():
    with pytest.raises(ConfigError):
        Scenario("rlc_cpl_step", dt=1e-2)
    with pytest.raises(ConfigError):
        Scenario("rlc_cpl_step", tf=1.00005)
    with pytest.raises(ConfigError):
        Scenario("unknown")
    with pytest.raises(ConfigError):
        run(default_scenario("stability_sweep"))


def test_two_area_zero_disturbance_keeps_intvars():
    traj, _ = run(two_area(tf=10.0, step_size=0.0, solar_sigma=0.0, agc=False))
    for a in range(2):
        assert np.max(np.abs(traj[f"z_{a}"])) < 1e-12
    assert np.max(np.abs(traj["freq_dev_0"])) < 1e-12


def test_two_area_droop_offset_without_agc():
    tp = TwoAreaParams(agc=False)
    traj, s = run(two_area(agc=False, solar_sigma=0.0))
    beta = sum(s.extra["beta"])
    expected = -tp.step_size / beta
    for f in s.extra["final_freq_dev"]:
        assert f == pytest.approx(expected, rel=1e-3)


def test_two_area_agc_restores():
    _, s = run(two_area(agc=True, solar_sigma=0.0))
    eps = TwoAreaParams().eps
    assert max(abs(f) for f in s.extra["final_freq_dev"]) <= eps
    assert abs(s.extra["final_tie_dev"]) <= eps
    assert s.settled


def test_two_area_intvar_rate_identity():
    _, s = run(two_area(solar_sigma=0.01, tf=20.0))
    assert s.extra["intvar_integral_error"] <= 1e-6


def test_beta_is_composite_response():
    _, s = run(two_area(tf=1.0))
    u = TwoAreaParams().unit
    assert s.extra["beta"] == [pytest.approx(2 * u.response)] * 2
    assert math.isclose(u.response, 2 + 5)
