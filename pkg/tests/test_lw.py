import math

import numpy as np
import pytest

import dipolesim as ds
from dipolesim.constants import CODATA
from dipolesim.lw import field_on_grid, lw_fields, lw_fields_total, lw_potentials, retarded_time
from dipolesim.trajectory import TrajectoryHistory
from dipolesim.validation import _far_field_deviation

C = CODATA.c
EPS0 = CODATA.eps0


def uniform_history(q=1.602176634e-18, v=C / 100.0, dt=1e-17, n=3000):
    return TrajectoryHistory.from_function(
        q, lambda t: np.array([v * t, 0.0, 0.0]), 0.0, dt, n,
        v_func=lambda t: np.array([v, 0.0, 0.0]),
        a_func=lambda t: np.zeros(3))


def exact_uniform_delay(obs, t, v):
    """Causal root of |obs - v t_r x| = c (t - t_r), solved for t - t_r."""
    w = np.asarray(obs, dtype=float) - np.array([v * t, 0.0, 0.0])
    wv = w[0] * v
    a2 = C * C - v * v
    return (wv + math.sqrt(wv * wv + a2 * float(w @ w))) / a2


# --- retarded time ------------------------------------------------------------


def test_retarded_time_static_charge():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=8)
    t = 5e-16
    R = 3e-8
    tr = retarded_time([R, 0, 0], t, h)
    assert tr == pytest.approx(t - R / C, rel=0, abs=1e-9 * h.dt * 1e3)
    assert tr <= t


@pytest.mark.parametrize("obs", [
    (2e-9, 1e-9, 0.0),       # ahead, off-axis
    (2e-9, 0.0, 0.0),        # ahead, on-axis
    (-1e-9, 0.5e-9, 0.3e-9),  # behind
])
def test_retarded_time_uniform_motion_closed_form(obs):
    v = C / 100.0
    h = uniform_history(v=v)
    t = 2500 * h.dt
    tr = retarded_time(np.array(obs), t, h)
    tau = exact_uniform_delay(obs, t, v)
    assert (t - tr) == pytest.approx(tau, rel=1e-12)


def test_retarded_time_residual_bound():
    # solver contract: |t_r - (t - R_s(t_r)/c)| <= 1e-3 dt
    v = C / 100.0
    h = uniform_history(v=v)
    t = 1000 * h.dt
    obs = np.array([5e-9, 2e-9, 0.0])
    tr = retarded_time(obs, t, h)
    st = h.state_at(tr)
    resid = tr - (t - np.linalg.norm(obs - st.r) / C)
    assert abs(resid) <= 1e-3 * h.dt


def test_retarded_time_prehistory():
    h = TrajectoryHistory.static(1e-19, [1e-9, 0, 0], dt=1e-16, n=4)
    t = -2e-15  # before the history starts: static pre-history position
    obs = np.array([1e-8, 0, 0])
    tr = retarded_time(obs, t, h)
    assert tr == pytest.approx(t - (1e-8 - 1e-9) / C, rel=1e-14)


def test_singularity_exclusion():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    with pytest.raises(ds.SingularityError):
        lw_fields([0.0, 0.0, 0.0], 2e-16, h)


# --- potentials and fields ------------------------------------------------------


def test_static_charge_coulomb_limit():
    q = 1.602176634e-18
    h = TrajectoryHistory.static(q, [0, 0, 0], dt=1e-16, n=4)
    R = 1e-8
    fs = lw_fields([R, 0, 0], 2e-16, h)
    coul = q / (4 * math.pi * EPS0 * R * R)
    assert fs.E_coul[0] == pytest.approx(coul, rel=1e-12)
    assert np.linalg.norm(fs.E_rad) == 0.0
    assert np.linalg.norm(fs.B) == 0.0
    phi, A = lw_potentials([R, 0, 0], 2e-16, h)
    assert phi == pytest.approx(q / (4 * math.pi * EPS0 * R), rel=1e-12)
    assert np.linalg.norm(A) == 0.0


def test_linearity_in_charge():
    h1 = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    h2 = TrajectoryHistory.static(2e-19, [0, 0, 0], dt=1e-16, n=4)
    obs = [3e-9, 1e-9, 0]
    f1 = lw_fields(obs, 2e-16, h1)
    f2 = lw_fields(obs, 2e-16, h2)
    np.testing.assert_allclose(f2.E, 2 * f1.E, rtol=1e-12)
    assert f2.phi == pytest.approx(2 * f1.phi, rel=1e-12)


def test_superposition_two_charges():
    ha = TrajectoryHistory.static(1e-19, [1e-9, 0, 0], dt=1e-16, n=4)
    hb = TrajectoryHistory.static(-1e-19, [-1e-9, 0, 0], dt=1e-16, n=4)
    obs = [0, 5e-9, 0]
    t = 2e-16
    total = lw_fields_total(obs, t, [ha, hb])
    indiv = lw_fields(obs, t, ha) + lw_fields(obs, t, hb)
    np.testing.assert_allclose(total.E, indiv.E, rtol=1e-12)
    np.testing.assert_allclose(total.B, indiv.B, rtol=0, atol=1e-30)


def test_uniform_motion_kappa_enhancement():
    # head-on approach at beta = 0.01: phi = q/(4 pi eps0 kappa R_s);
    # the observation point is ahead of the charge so n_s points along v
    v = C / 100.0
    q = 1.602176634e-18
    h = uniform_history(q=q, v=v)
    t = 1000 * h.dt
    obs = np.array([5e-8, 0.0, 0.0])
    assert v * t < obs[0]  # still approaching
    tau = exact_uniform_delay(obs, t, v)
    R_s = C * tau
    phi, A = lw_potentials(obs, t, h)
    kappa = 1.0 - v / C
    static_phi = q / (4 * math.pi * EPS0 * R_s)
    assert phi == pytest.approx(static_phi / kappa, rel=1e-10)
    np.testing.assert_allclose(A, np.array([v, 0, 0]) * phi / C**2, rtol=1e-12)


def test_velocity_field_dominates_at_low_beta():
    # |E_coul| stays within 3% of the instantaneous-Coulomb magnitude at beta<=0.01
    w0 = 1.2566e15
    y0 = 1e-9
    amp_v = 0.5 * w0 * y0  # ~ c/477
    dt = 1e-17
    h = TrajectoryHistory.from_function(
        1e-18, lambda t: np.array([0, 0.5 * y0 * math.sin(w0 * t), 0]),
        0.0, dt, 4000,
        v_func=lambda t: np.array([0, 0.5 * y0 * w0 * math.cos(w0 * t), 0]),
        a_func=lambda t: np.array([0, -0.5 * y0 * w0 * w0 * math.sin(w0 * t), 0]))
    for tq in (2000 * dt, 2500 * dt, 3333 * dt):
        for obs in ([3e-8, 0, 0], [0, 4e-8, 0], [2e-8, 2e-8, 1e-8]):
            out = ds.lw_fields(np.array(obs, dtype=float), tq, h)
            tr = retarded_time(np.array(obs, dtype=float), tq, h)
            rs = np.linalg.norm(np.array(obs) - h.state_at(tr).r)
            coul = abs(h.charge) / (4 * math.pi * EPS0 * rs * rs)
            assert np.linalg.norm(out.E_coul) >= 0.97 * coul


def test_causality_future_perturbation_is_invisible():
    v = C / 200.0
    h = uniform_history(v=v, n=2000)
    t = 1500 * h.dt
    obs = np.array([1e-8, 2e-6, 0.0])  # ~670 steps of light delay
    tr = retarded_time(obs, t, h)
    assert tr <= t
    before = lw_fields(obs, t, h)
    # Corrupt samples strictly between t_r and t, leaving the interpolation
    # stencils at both ends untouched (the solver seeds its guess from the
    # state at t, so rows near t must stay intact for a bit-identical path).
    lo = int((tr - h.t0) / h.dt) + 4
    hi = int((t - h.t0) / h.dt) - 4
    assert hi > lo + 8
    h._r[lo:hi] += 1e-9
    h._v[lo:hi] += 1e4
    after = lw_fields(obs, t, h)
    np.testing.assert_array_equal(before.E, after.E)
    np.testing.assert_array_equal(before.B, after.B)


def test_gauge_consistency_static_gradient():
    # E = -grad(phi) for a static charge, central differences at R = 10 nm
    q = 1.602176634e-18
    h = TrajectoryHistory.static(q, [0, 0, 0], dt=1e-16, n=4)
    t = 2e-16
    obs = np.array([10e-9, 0, 0])
    step = 1e-13
    grad = np.zeros(3)
    for k in range(3):
        dp = obs.copy(); dp[k] += step
        dm = obs.copy(); dm[k] -= step
        grad[k] = (lw_potentials(dp, t, h)[0] - lw_potentials(dm, t, h)[0]) / (2 * step)
    E = lw_fields(obs, t, h).E
    np.testing.assert_allclose(E, -grad, rtol=1e-6)


def test_oscillating_pair_matches_ideal_dipole_far_field(ref):
    assert _far_field_deviation(ref.params, k_r=50.0) < 0.01


# --- grid evaluation ------------------------------------------------------------


def test_grid_empty_sources():
    res = field_on_grid([], [[0, 0, 0], [1e-9, 0, 0]], 1e-16)
    assert res.ok
    for s in res.samples:
        assert np.all(s.E == 0) and np.all(s.B == 0) and s.phi == 0


def test_grid_mirror_symmetry():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    res = field_on_grid([h], [[2e-9, 1e-9, 0], [-2e-9, 1e-9, 0]], 2e-16)
    a, b = res.samples
    assert a.E[0] == pytest.approx(-b.E[0], rel=1e-14)
    assert a.E[1] == pytest.approx(b.E[1], rel=1e-14)


def test_grid_matches_pointwise_calls():
    h = TrajectoryHistory.static(1e-19, [1e-9, 0, 0], dt=1e-16, n=4)
    pts = [[5e-9, 0, 0], [0, 5e-9, 0], [0, 0, 5e-9]]
    res = field_on_grid([h], pts, 2e-16)
    for p, s in zip(pts, res.samples):
        direct = lw_fields(p, 2e-16, h)
        np.testing.assert_array_equal(s.E_coul, direct.E_coul)
        np.testing.assert_array_equal(s.E_rad, direct.E_rad)


def test_grid_reports_singular_points_by_index():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    res = field_on_grid([h], [[5e-9, 0, 0], [0, 0, 0], [0, 5e-9, 0]], 2e-16)
    assert len(res.errors) == 1
    idx, exc = res.errors[0]
    assert idx == 1 and isinstance(exc, ds.SingularityError)
    assert res.samples[0] is not None and res.samples[2] is not None
    assert res.samples[1] is None


def test_grid_threaded_matches_serial():
    h = TrajectoryHistory.static(1e-19, [0, 0, 0], dt=1e-16, n=4)
    pts = [[(i + 2) * 1e-9, 1e-9, 0] for i in range(8)]
    serial = field_on_grid([h], pts, 2e-16)
    threaded = field_on_grid([h], pts, 2e-16, threads=4)
    for a, b in zip(serial.samples, threaded.samples):
        np.testing.assert_array_equal(a.E, b.E)
