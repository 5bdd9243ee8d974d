import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dipolesim as ds
from dipolesim.trajectory import ChargeState, TrajectoryHistory


def test_static_history_prehistory_and_query():
    h = TrajectoryHistory.static(1e-19, [1e-9, 0, 0], dt=1e-16, n=4)
    st_ = h.state_at(-5e-16)  # before the first sample: static, at rest
    np.testing.assert_allclose(st_.r, [1e-9, 0, 0])
    assert np.all(st_.v == 0) and np.all(st_.a == 0)
    st2 = h.state_at(2.5e-16)
    np.testing.assert_allclose(st2.r, [1e-9, 0, 0])


def test_query_beyond_last_sample_rejected():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    with pytest.raises(ds.DomainError):
        h.state_at(h.t_last + 0.5 * h.dt)


def test_append_state_spacing_enforced():
    h = TrajectoryHistory(1e-19, dt=1e-16)
    z = np.zeros(3)
    h.append_state(ChargeState(0.0, z, z, z))
    with pytest.raises(ds.DomainError):
        h.append_state(ChargeState(1.7e-16, z, z, z))


def test_speed_below_c_enforced():
    with pytest.raises(ds.DomainError):
        ChargeState(0.0, np.zeros(3), [3.1e8, 0, 0], np.zeros(3))


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-1e18, 1e18), v0=st.floats(-1e6, 1e6),
       x0=st.floats(-1e-6, 1e-6), frac=st.floats(0.01, 0.99))
def test_hermite_exact_for_quadratic_motion(a, v0, x0, frac):
    # r(t) = x0 + v0 t + a t^2/2 is reproduced exactly between samples,
    # up to fp rounding: the Hermite velocity divides position terms by dt,
    # amplifying their eps-level noise to eps*|r|/dt
    dt = 1e-16
    h = TrajectoryHistory.from_function(
        1e-19, lambda t: np.array([x0 + v0 * t + 0.5 * a * t * t, 0, 0]),
        0.0, dt, 6,
        v_func=lambda t: np.array([v0 + a * t, 0, 0]),
        a_func=lambda t: np.array([a, 0, 0]))
    t = (2 + frac) * dt
    got = h.state_at(t)
    eps = 2.220446049250313e-16
    r_scale = max(abs(x0), abs(v0 * t), abs(a * t * t), 1e-300)
    assert got.r[0] == pytest.approx(x0 + v0 * t + 0.5 * a * t * t,
                                     rel=1e-12, abs=64 * eps * r_scale)
    v_noise = 64 * eps * r_scale / dt
    assert got.v[0] == pytest.approx(v0 + a * t, rel=1e-12, abs=v_noise)
    assert got.a[0] == pytest.approx(a, rel=1e-12, abs=1e-30)


def test_from_function_numerical_derivatives():
    w = 1e15
    h = TrajectoryHistory.from_function(
        1e-19, lambda t: np.array([0.0, 1e-9 * np.cos(w * t), 0.0]),
        0.0, 1e-17, 32)
    got = h.state_at(1.55e-16)
    assert got.v[1] == pytest.approx(-1e-9 * w * np.sin(w * 1.55e-16), rel=1e-4)


def test_window_mode_compacts_and_blocks_prehistory():
    h = TrajectoryHistory(1e-19, dt=1e-16, max_rows=8)
    for i in range(12):
        h.append([i * 1e-10, 0, 0], [1e6, 0, 0], [0, 0, 0])
    assert h.count <= 8
    assert h.t0 > 0.0
    with pytest.raises(ds.HorizonError):
        h.state_at(h.t0 - 0.5 * h.dt)
    # retained samples still queryable
    got = h.state_at(h.t_last)
    assert got.r[0] == pytest.approx(11e-10)


def test_times_uniform_spacing():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=2e-16, n=5)
    t = h.times()
    np.testing.assert_allclose(np.diff(t), 2e-16)
