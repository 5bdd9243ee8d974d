"""Analytic free-space dyadic Green function, dipole-dipole rates,
polarizability, and the two-scatterer Dyson solution.

Normalization follows the omega^2/c^2 source convention: the smooth part of
the homogeneous-medium tensor is

    G(r,r',w) = k0^2 e^{i kB R}/(4 pi R) [ (1 + (i kB R - 1)/(kB R)^2) I
                + ((3 - 3 i kB R - (kB R)^2)/(kB R)^2) RR/R^2 ],

with k0 = w/c, kB = n_B k0, R = r - r'. Rates then carry the 1/(eps0 hbar)
prefactor, e.g. the free-space SE rate gamma0 = d^2 w^3/(3 pi eps0 hbar c^3)
and the near-field s-polarized coupling hbar g = d1 d2/(4 pi eps0 R^3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CODATA
from .errors import DomainError, PoleError, SingularityError, SolverError

__all__ = [
    "GreensSample",
    "CouplingRates",
    "free_space_green",
    "im_green_coincident",
    "se_rate",
    "coupling_rates",
    "near_field_coupling",
    "analytic_dipole_fields",
    "polarizability",
    "dyson_two_scatterer",
    "dyson_pole_frequencies",
]

_MIN_SEPARATION = 1e-15  # m


@dataclass(frozen=True)
class GreensSample:
    """Green tensor between two points at one frequency, with its split."""

    tensor: np.ndarray       # (3,3) complex
    transverse: np.ndarray   # (3,3) complex
    longitudinal: np.ndarray  # (3,3) complex, frequency independent
    r: np.ndarray
    r_prime: np.ndarray
    omega: float
    n_B: float


@dataclass(frozen=True)
class CouplingRates:
    """Coherent/incoherent dipole-dipole rates and the super/subradiant pair."""

    g12: float          # coherent coupling (rad/s)
    gamma12: float      # incoherent transfer rate (1/s)
    gamma0: float       # single-dipole free-space rate used for the split
    gamma_plus: float   # superradiant decay rate gamma0 + gamma12
    gamma_minus: float  # subradiant decay rate gamma0 - gamma12


def _separation(r, r_prime):
    rv = np.asarray(r, dtype=float) - np.asarray(r_prime, dtype=float)
    R = float(np.linalg.norm(rv))
    if R < _MIN_SEPARATION:
        raise SingularityError(
            "coincident points: the Green tensor diverges; use "
            "im_green_coincident for the equal-point imaginary part"
        )
    return rv, R


def free_space_green(r, r_prime, omega: float, n_B: float = 1.0) -> GreensSample:
    """Homogeneous-medium dyadic Green function between r' and r."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    rv, R = _separation(r, r_prime)
    k0 = omega / CODATA.c
    kB = n_B * k0
    rho = kB * R
    rr = np.outer(rv, rv) / (R * R)
    eye = np.eye(3)
    pref = k0 * k0 * np.exp(1j * rho) / (4.0 * math.pi * R)
    tensor = pref * ((1.0 + (1j * rho - 1.0) / rho**2) * eye
                     + ((3.0 - 3.0j * rho - rho**2) / rho**2) * rr)
    longitudinal = -(eye - rr) / (4.0 * math.pi * R**3) + 0j
    transverse = tensor - longitudinal
    return GreensSample(tensor=tensor, transverse=transverse,
                        longitudinal=longitudinal,
                        r=np.asarray(r, dtype=float),
                        r_prime=np.asarray(r_prime, dtype=float),
                        omega=omega, n_B=n_B)


def im_green_coincident(omega: float, n_B: float = 1.0) -> float:
    """Equal-point Im G_ii in a homogeneous medium: n_B w^3/(6 pi c^3)."""
    if omega < 0:
        raise DomainError("omega must be non-negative")
    return n_B * omega**3 / (6.0 * math.pi * CODATA.c**3)


def se_rate(d, im_green_diag: float | None = None, omega: float | None = None,
            n_B: float = 1.0) -> float:
    """Spontaneous-emission rate 2 d.ImG.d/(eps0 hbar) for a diagonal Im G.

    With im_green_diag omitted, the free-space coincident value at `omega` is
    used, which reproduces gamma0 = d^2 w^3/(3 pi eps0 hbar c^3) exactly.
    """
    if im_green_diag is None:
        if omega is None:
            raise DomainError("need omega when im_green_diag is not given")
        im_green_diag = im_green_coincident(omega, n_B)
    dv = np.asarray(d, dtype=float)
    d2 = float(dv @ dv) if dv.ndim else float(dv) ** 2
    return 2.0 * d2 * im_green_diag / (CODATA.eps0 * CODATA.hbar)


def coupling_rates(d1, d2, R1, R2, omega: float, n_B: float = 1.0) -> CouplingRates:
    """Dipole-dipole rates between dipole vectors d1 at R1 and d2 at R2.

    g12 = -d1.ReG.d2/(eps0 hbar) and gamma12 = 2 d1.ImG.d2/(eps0 hbar); the
    super/subradiant rates gamma0 +/- gamma12 assume identical dipoles (the
    reference gamma0 is evaluated from d1).
    """
    d1v = np.asarray(d1, dtype=float)
    d2v = np.asarray(d2, dtype=float)
    G = free_space_green(R1, R2, omega, n_B).tensor
    eh = CODATA.eps0 * CODATA.hbar
    g12 = -float(d1v @ G.real @ d2v) / eh
    gamma12 = 2.0 * float(d1v @ G.imag @ d2v) / eh
    gamma0 = se_rate(d1v, omega=omega, n_B=n_B)
    return CouplingRates(g12=g12, gamma12=gamma12, gamma0=gamma0,
                         gamma_plus=gamma0 + gamma12,
                         gamma_minus=gamma0 - gamma12)


def near_field_coupling(d1: float, d2: float, R: float) -> float:
    """Retardation-free s-polarized coupling g = d1 d2/(4 pi eps0 hbar R^3)."""
    if R < _MIN_SEPARATION:
        raise SingularityError("coincident dipoles")
    return d1 * d2 / (4.0 * math.pi * CODATA.eps0 * CODATA.hbar * R**3)


def analytic_dipole_fields(d0, omega: float, R, t: float):
    """Instantaneous (E, B) of an ideal oscillating dipole d0 e^{-i w t}.

    R is the observation point relative to the dipole's (fixed) center. The
    near (1/R^3), intermediate (1/R^2) and far (1/R) terms are all retained;
    the returned fields are the real parts of the complex solution.
    """
    dv = np.asarray(d0, dtype=float)
    rv = np.asarray(R, dtype=float)
    Rn = float(np.linalg.norm(rv))
    if Rn < _MIN_SEPARATION:
        raise SingularityError("observation at the dipole position")
    rhat = rv / Rn
    k = omega / CODATA.c
    phase = np.exp(1j * (k * Rn - omega * t))
    rad = k * k * np.cross(np.cross(rhat, dv), rhat) / Rn
    near = (3.0 * (rhat @ dv) * rhat - dv) * (1.0 / Rn**3 - 1j * k / Rn**2)
    E = (rad * phase + near * phase) / (4.0 * math.pi * CODATA.eps0)
    mu0 = 1.0 / (CODATA.eps0 * CODATA.c**2)
    B = (mu0 / (4.0 * math.pi)) * CODATA.c * k * k * np.cross(rhat, dv) \
        * (1.0 - 1.0 / (1j * k * Rn)) * phase / Rn
    return np.real(E), np.real(B)


def polarizability(d: float, omega_n: float, omega: float) -> float:
    """Lossless oscillator polarizability 2 d^2 w_n/(eps0 hbar (w_n^2 - w^2))."""
    if omega_n <= 0:
        raise DomainError("omega_n must be positive")
    if omega == omega_n:
        raise PoleError("polarizability pole at omega = omega_n (lossless model)")
    return 2.0 * d * d * omega_n / (CODATA.eps0 * CODATA.hbar
                                    * (omega_n**2 - omega**2))


def dyson_two_scatterer(R1, R2, alphas, omega: float, orientations=None,
                        n_B: float = 1.0):
    """Two-scatterer Green function G2(R1,R2,w) and its pole denominator.

    alphas = (alpha1, alpha2) are scalar polarizabilities along the unit
    orientations (default y for both). Self-interaction terms G(Rn,Rn) are
    dropped (their real part diverges in free space; resonance shifts and the
    background decay are already carried by the oscillator parameters), which
    reduces the iterated Dyson chain to

        G2 = G0(R1,R2) / (1 - G21 a1 G12 a2),

    with Gij the orientation-projected background tensor. Returns
    (GreensSample, denominator).
    """
    if orientations is None:
        orientations = (np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    e1 = np.asarray(orientations[0], dtype=float)
    e2 = np.asarray(orientations[1], dtype=float)
    a1, a2 = alphas
    g0 = free_space_green(R1, R2, omega, n_B)
    g12 = complex(e1 @ g0.tensor @ e2)
    g21 = complex(e2 @ free_space_green(R2, R1, omega, n_B).tensor @ e1)
    denom = 1.0 - g21 * a1 * g12 * a2
    if denom == 0:
        raise PoleError("on-pole evaluation: denominator is exactly zero")
    sample = GreensSample(tensor=g0.tensor / denom,
                          transverse=g0.transverse / denom,
                          longitudinal=g0.longitudinal / denom,
                          r=g0.r, r_prime=g0.r_prime, omega=omega, n_B=n_B)
    return sample, denom


def dyson_pole_frequencies(d: float, omega_n: float, R1, R2, orientations=None,
                           n_B: float = 1.0, span: float = 3.0,
                           tol_factor: float = 1e-12, grid: int = 4001):
    """Hybrid-mode frequencies from the zeros of the lossless Dyson denominator.

    Scans D(w) = 1 - a1(w) a2(w) ReG21(w) ReG12(w) over a window of width
    `span` polariton splittings around omega_n, brackets the sign changes and
    bisects each to tol_factor*omega_n. Returns the ascending zero list.
    """
    if orientations is None:
        orientations = (np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    e1 = np.asarray(orientations[0], dtype=float)
    e2 = np.asarray(orientations[1], dtype=float)

    def denom(w):
        a = polarizability(d, omega_n, w)
        G = free_space_green(R1, R2, w, n_B).tensor.real
        g12 = float(e1 @ G @ e2)
        g21 = float(e2 @ G @ e1)
        return 1.0 - a * a * g12 * g21

    g_near = near_field_coupling(d, d, float(np.linalg.norm(
        np.asarray(R1, dtype=float) - np.asarray(R2, dtype=float))))
    half_width = span * 2.0 * g_near
    lo = omega_n - half_width
    hi = omega_n + half_width
    ws = np.linspace(lo, hi, grid)
    ws = ws[np.abs(ws - omega_n) > 1e-9 * omega_n]  # skip the polarizability pole
    vals = np.array([denom(w) for w in ws])
    zeros = []
    for i in range(len(ws) - 1):
        if vals[i] == 0.0:
            zeros.append(float(ws[i]))
            continue
        # No zero crossing through the pole itself: D -> -inf on both sides.
        if vals[i] * vals[i + 1] < 0.0:
            a, b = float(ws[i]), float(ws[i + 1])
            fa = vals[i]
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = denom(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a = mid
                    fa = fm
                if b - a <= tol_factor * omega_n:
                    break
            zeros.append(0.5 * (a + b))
    if not zeros:
        raise SolverError("no denominator zeros found in the scan window")
    return sorted(zeros)
