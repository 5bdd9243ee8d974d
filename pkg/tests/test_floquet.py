import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dipolesim as ds
from dipolesim.floquet import (
    CoupledHOParams,
    DriveSpec,
    FloquetProblem,
    build_h_blocks,
    coupling_waveform,
    fold_quasienergy,
    fourier_coupling,
    normal_modes,
    normal_modes_general,
    quasienergies,
    renormalized_coupling,
    sweep,
)

W0 = 2 * math.pi * 200e12
G = 0.00136 * W0
HO = CoupledHOParams(W0, G)


# --- waveform and Fourier coefficients -------------------------------------------


def test_waveform_values():
    drive = DriveSpec(r=0.5, omega_M=G)
    assert coupling_waveform(HO, drive, 0.0) == pytest.approx(G, rel=1e-15)
    quarter = 0.5 * math.pi / drive.omega_M
    assert coupling_waveform(HO, drive, quarter) == pytest.approx(G / 3.375,
                                                                  rel=1e-12)
    drive0 = DriveSpec(r=0.0, omega_M=G)
    for t in (0.0, 1e-12, 7e-12):
        assert coupling_waveform(HO, drive0, t) == G


def test_fourier_r0_is_kronecker():
    drive = DriveSpec(r=0.0, omega_M=G)
    assert fourier_coupling(HO, drive, 0) == G
    for m in (1, -1, 2, 5):
        assert fourier_coupling(HO, drive, m) == 0.0


@pytest.mark.parametrize("r", [0.1, 0.35, 0.5, 0.7])
def test_fourier_m0_matches_closed_form(r):
    got = fourier_coupling(HO, DriveSpec(r=r, omega_M=G), 0)
    want = G * (1 + 0.5 * r * r) / (1 - r * r) ** 2.5
    assert got.real == pytest.approx(want, rel=1e-10)
    assert abs(got.imag) < 1e-10 * want


def test_fourier_closed_form_small_amplitude():
    got = fourier_coupling(HO, DriveSpec(r=0.1, omega_M=G), 0)
    assert got.real / G == pytest.approx(1.005 / 0.99**2.5, rel=1e-10)


def test_fourier_symmetry_and_parity():
    drive = DriveSpec(r=0.4, omega_M=G)
    for m in range(0, 7):
        gm = fourier_coupling(HO, drive, m)
        gmm = fourier_coupling(HO, drive, -m)
        assert gmm == pytest.approx(gm.conjugate(), rel=1e-10, abs=1e-12 * G)
        # real waveform symmetric about a quarter period: even m real, odd imaginary
        if m % 2 == 0:
            assert abs(gm.imag) < 1e-10 * G
        else:
            assert abs(gm.real) < 1e-10 * G


@pytest.mark.parametrize("r", [0.1, 0.3, 0.5])
def test_fourier_magnitude_decays(r):
    drive = DriveSpec(r=r, omega_M=G)
    mags = [abs(fourier_coupling(HO, drive, m)) for m in range(0, 8)]
    assert all(a > b for a, b in zip(mags, mags[1:]))


def test_renormalized_coupling_monotone():
    rs = np.linspace(0.0, 0.8, 81)
    vals = np.array([renormalized_coupling(HO, float(r)) for r in rs])
    assert vals[0] == G
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals >= G)


# --- blocks and normal modes -------------------------------------------------------


def test_blocks_static_limit():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.0, omega_M=G), L=3)
    blocks = build_h_blocks(prob)
    h0 = blocks[0]
    assert h0[0, 0] == W0 and h0[1, 1] == W0
    assert h0[2, 2] == -W0 and h0[3, 3] == -W0
    assert h0[0, 1] == G and h0[2, 1] == -G
    for m in range(1, 7):
        assert np.all(blocks[m] == 0) and np.all(blocks[-m] == 0)


def test_block_pattern_every_order():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.3, omega_M=G), L=4)
    blocks = build_h_blocks(prob)
    for m, h in blocks.items():
        gm = prob.g_m(m)
        assert h[0, 1] == gm and h[0, 3] == gm
        assert h[1, 0] == gm and h[1, 2] == gm
        assert h[2, 1] == -gm and h[2, 3] == -gm
        assert h[3, 0] == -gm and h[3, 2] == -gm
        assert h[0, 2] == 0 and h[1, 3] == 0 and h[2, 0] == 0 and h[3, 1] == 0
        if m != 0:
            assert np.all(np.diag(h) == 0)


def test_block_trace_zero():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.3, omega_M=G), L=3)
    for h in build_h_blocks(prob).values():
        assert np.trace(h) == 0


def test_normal_modes_values():
    wp, wm = normal_modes(HO)
    assert wp == pytest.approx(math.sqrt(W0**2 + 2 * G * W0), rel=1e-15)
    assert wm == pytest.approx(math.sqrt(W0**2 - 2 * G * W0), rel=1e-15)
    assert wp > W0 > wm
    # splitting is 2g to first order in eta
    assert (wp - wm) == pytest.approx(2 * G, rel=HO.eta**2)


def test_normal_modes_zero_coupling_general_form():
    wp, wm = normal_modes_general(W0, W0, 0.0)
    assert wp == W0 and wm == W0


def test_normal_modes_general_specializes():
    wp, wm = normal_modes_general(W0, W0, G)
    wps, wms = normal_modes(HO)
    assert wp == pytest.approx(wps, rel=1e-15)
    assert wm == pytest.approx(wms, rel=1e-15)


def test_normal_modes_domain_error():
    with pytest.raises(ds.DomainError):
        normal_modes_general(W0, W0, 0.51 * W0)


def test_params_validation():
    with pytest.raises(ds.DomainError):
        CoupledHOParams(W0, 0.0)
    with pytest.raises(ds.DomainError):
        CoupledHOParams(W0, 0.6 * W0)
    with pytest.raises(ds.DomainError):
        DriveSpec(r=1.0, omega_M=G)


# --- quasienergies ------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-1e13, 1e13), k=st.integers(-50, 50))
def test_fold_periodicity(x, k):
    wM = 1.7e12
    a = fold_quasienergy(x, wM)
    b = fold_quasienergy(x + k * wM, wM)
    # x + k*wM itself rounds; folding cannot beat that representation error
    slack = 4.0 * np.spacing(abs(x) + abs(k) * wM)
    assert a == pytest.approx(b, abs=max(1e-3, slack))
    assert -0.5 * wM - slack < a <= 0.5 * wM + slack


def test_static_fold_set():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.0, omega_M=G))
    spec = quasienergies(prob)
    wp, wm = normal_modes(HO)
    expected = fold_quasienergy(np.array([wp, wm, -wp, -wm]), G)
    for q in expected:
        assert np.abs(np.asarray(spec.quasienergies) - q).min() < 1e-12 * W0
    assert len(spec.quasienergies) == 4
    assert spec.converged


def test_static_lines_replicated_at_integer_offsets():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.0, omega_M=G))
    spec = quasienergies(prob, zones=3.0)
    wp, wm = normal_modes(HO)
    want = []
    for l in range(-10, 11):
        for w in (wp, wm):
            p = w + l * G
            if abs(p - W0) <= 3.0 * G:
                want.append(p)
    got = sorted(ln.position for ln in spec.lines)
    assert len(got) == len(want)
    np.testing.assert_allclose(got, sorted(want), rtol=1e-9)


def test_static_bright_lines_are_only_the_polaritons():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.0, omega_M=G))
    spec = quasienergies(prob, zones=3.0)
    wp, wm = normal_modes(HO)
    np.testing.assert_allclose(spec.bright_lines(1e-6), [wm, wp], rtol=1e-12)


def test_driven_slow_regime_near_degenerate_zone():
    # omega_M = g, r = 0.1: the two bright manifolds stay nearly degenerate
    # within each zone (single-peak-per-zone regime)
    prob = FloquetProblem.build(HO, DriveSpec(r=0.1, omega_M=G))
    spec = quasienergies(prob, zones=3.0)
    bright = spec.bright_lines(1e-3)
    res = np.sort(np.mod(bright - W0, G)) / G
    # collapse circularly: distances to the densest center below 0.15
    center = np.median(np.where(res > 0.5, res - 1.0, res))
    dist = np.abs(np.where(res > 0.5, res - 1.0, res) - center)
    assert np.all(dist < 0.15)


def test_driven_fast_regime_doublet_per_zone():
    # omega_M = 5g, r = 0.1: each zone holds a doublet split by ~2 g0(r)
    prob = FloquetProblem.build(HO, DriveSpec(r=0.1, omega_M=5 * G))
    spec = quasienergies(prob, zones=1.4)
    bright = spec.bright_lines(1e-6)
    central = bright[np.abs(bright - W0) < 2.5 * G]
    assert len(central) == 2
    split = central[1] - central[0]
    assert split == pytest.approx(2 * renormalized_coupling(HO, 0.1), rel=0.02)
    assert abs(split / (2 * G) - 1.0) < 0.15


def test_quasienergy_interval_and_convergence_gate():
    prob = FloquetProblem.build(HO, DriveSpec(r=0.35, omega_M=5 * G))
    spec = quasienergies(prob)
    assert spec.converged
    assert spec.max_line_shift <= 1e-9 * W0
    q = np.asarray(spec.quasienergies)
    assert np.all(q > -0.5 * spec.omega_M) and np.all(q <= 0.5 * spec.omega_M + 1e-6)


def test_auto_truncation_grows_with_amplitude():
    small = FloquetProblem.build(HO, DriveSpec(r=0.1, omega_M=G))
    large = FloquetProblem.build(HO, DriveSpec(r=0.7, omega_M=G))
    assert small.L >= 10
    assert large.L >= small.L
    g0 = abs(large.g_m(0))
    assert abs(large.g_m(2 * large.L)) / g0 < 1e-8


# --- sweep -------------------------------------------------------------------------


def test_sweep_static_point_matches_spectrum():
    res = sweep(HO, [0.0], G, L=10)
    assert not res.failures
    spec = res.spectra[0]
    static = quasienergies(FloquetProblem.build(HO, DriveSpec(0.0, G), L=10),
                           check_convergence=False)
    np.testing.assert_allclose(spec.quasienergies, static.quasienergies,
                               rtol=1e-12)
    wp, wm = normal_modes(HO)
    np.testing.assert_allclose(res.dc_modes, (wp, wm), rtol=1e-15)


def test_sweep_renormalized_curves_use_closed_form():
    res = sweep(HO, [0.0, 0.3], G, L=10)
    for i, r in enumerate((0.0, 0.3)):
        g0r = renormalized_coupling(HO, r)
        wp, wm = normal_modes(CoupledHOParams(W0, g0r))
        np.testing.assert_allclose(res.renormalized_modes[i], (wp, wm),
                                   rtol=1e-14)


def test_sweep_isolates_bad_points():
    res = sweep(HO, [0.1, 1.5], G, L=4)  # r = 1.5 is invalid
    assert res.spectra[0] is not None
    assert res.spectra[1] is None
    assert len(res.failures) == 1 and res.failures[0][0] == 1


def test_sweep_csv(tmp_path):
    res = sweep(HO, [0.0, 0.2], G, L=6)
    out = tmp_path / "sweep.csv"
    res.to_csv(out)
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "r,line_index,quasienergy_rad_s,unfolded_offset_over_omegaM,weight"
    assert len(rows) > 2
