import json

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from gridflux.errors import DimensionMismatch
from gridflux.sim import TwoAreaParams, stability_sweep, two_area_subsystems
from gridflux.stability import (
    INDETERMINATE,
    STABLE,
    SUBSYSTEM_UNSTABLE,
    SubsystemSpec,
    assemble,
    assess,
    leading_minors,
    oracle_full_spectrum,
)


def pair(coupling=None):
    subs = [SubsystemSpec(-np.eye(2), 2 * np.eye(2)), SubsystemSpec(-np.eye(2), 2 * np.eye(2))]
    return subs, coupling or {}


def test_decoupled_fixture():
    rep = assess(*pair())
    np.testing.assert_allclose(rep.W, -np.eye(2), atol=1e-14)
    np.testing.assert_allclose(rep.H[0], np.eye(2), atol=1e-14)
    assert rep.verdict == STABLE


def test_strong_coupling_fixture():
    rep = assess(*pair({(0, 1): 2 * np.eye(2), (1, 0): 2 * np.eye(2)}))
    np.testing.assert_allclose(rep.W, [[-1, 2], [2, -1]], atol=1e-14)
    assert rep.minors[1] == pytest.approx(-3.0)
    assert rep.verdict == INDETERMINATE


def test_unstable_subsystem():
    rep = assess([np.array([[0.5]]), np.array([[-1.0]])])
    assert rep.verdict == SUBSYSTEM_UNSTABLE
    assert rep.unstable == [0]
    assert rep.W is None


def test_self_coupling_adds_to_diagonal():
    rep = assess([np.array([[-1.0]])], {(0, 0): [[0.2]]})
    # H = 1/2, so the local margin is -1/2 * 1 / (1/2) = -1
    assert rep.W[0, 0] == pytest.approx(-1.0 + 0.2)


def test_coupling_shape_checked():
    with pytest.raises(DimensionMismatch):
        assess(*pair({(0, 1): np.eye(3)}))


def test_report_serialises():
    rep = assess(*pair({(0, 1): np.eye(2)}), oracle=True)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["verdict"] == STABLE and d["oracle_hurwitz"] is True


def test_leading_minors():
    assert leading_minors(np.array([[2.0, 1.0], [1.0, 3.0]])) == pytest.approx([2.0, 5.0])


def test_block_diagonal_spectrum_is_union():
    rng = np.random.default_rng(5)
    A1, A2 = rng.standard_normal((3, 3)), rng.standard_normal((2, 2))
    full = assemble([A1, A2])
    np.testing.assert_array_equal(full, sla.block_diag(A1, A2))
    union = np.concatenate([np.linalg.eigvals(A1), np.linalg.eigvals(A2)])
    assert oracle_full_spectrum([A1, A2]) == pytest.approx(np.max(union.real))


@st.composite
def weakly_coupled(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    subs = []
    for _ in range(draw(st.integers(2, 3))):
        n = int(rng.integers(1, 5))
        M = rng.standard_normal((n, n))
        subs.append(M - (np.max(np.linalg.eigvals(M).real) + rng.uniform(0.1, 2.0)) * np.eye(n))
    eps = draw(st.floats(0.0, 1.0))
    cpl = {}
    for i in range(len(subs)):
        for j in range(len(subs)):
            if i != j:
                cpl[(i, j)] = eps * rng.standard_normal((subs[i].shape[0], subs[j].shape[0]))
    return subs, cpl


@settings(max_examples=150, deadline=None)
@given(weakly_coupled())
def test_stable_verdict_is_sound(case):
    subs, cpl = case
    rep = assess(subs, cpl, oracle=True)
    if rep.verdict == STABLE:
        assert rep.oracle_max_real < 0


def test_coupling_sweep_crosses_from_stable_to_indeterminate():
    A1 = np.array([[-1.0, 2.0], [0.0, -3.0]])
    A2 = np.array([[-2.0, 0.5], [-0.5, -1.0]])
    base = np.array([[0.3, -0.1], [0.2, 0.4]])
    verdicts = []
    for k in np.geomspace(0.01, 100, 25):
        rep = assess([A1, A2], {(0, 1): k * base, (1, 0): k * base.T}, oracle=True)
        verdicts.append(rep.verdict)
        if rep.verdict == STABLE:
            assert rep.oracle_max_real < 0
    first = verdicts.index(INDETERMINATE)
    assert first > 0
    assert all(v == STABLE for v in verdicts[:first])
    assert all(v == INDETERMINATE for v in verdicts[first:])


def test_two_area_split_excludes_conserved_modes():
    subs, cpl, A_red = two_area_subsystems(TwoAreaParams(), 1.0)
    assert sum(s.n for s in subs) == A_red.shape[0]
    np.testing.assert_allclose(assemble(subs, cpl), A_red, atol=1e-12)
    assert all(np.max(np.linalg.eigvals(s.A).real) < 0 for s in subs)


def test_two_area_sweep_is_sound():
    rows = stability_sweep(TwoAreaParams())
    assert [b for b, _ in rows] == list(TwoAreaParams().susceptances)
    for _, rep in rows:
        assert rep.oracle_max_real < 0
        assert rep.verdict in (STABLE, INDETERMINATE)
    # the inter-area coupling scales with omega0 / M and swamps the local margins
    assert all(rep.verdict == INDETERMINATE for _, rep in rows)
