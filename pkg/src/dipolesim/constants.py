"""Physical constants and derivation of per-dipole parameters.

All quantities are SI. Frequencies are angular (rad/s) everywhere inside the
package; config-file parsing applies the 2*pi conversion for Hz-family units,
so an input of "200 THz" is stored as omega0 = 2*pi*200e12 rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Constants",
    "CODATA",
    "DipoleParams",
    "derive_dipole_params",
    "free_space_decay_rate",
]


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values; the single source of constants for the package."""

    c: float = 299792458.0            # speed of light (m/s), exact
    eps0: float = 8.8541878128e-12    # vacuum permittivity (F/m)
    hbar: float = 1.054571817e-34     # reduced Planck constant (J s)
    e: float = 1.602176634e-19        # elementary charge (C), exact

    def __post_init__(self):
        for name in ("c", "eps0", "hbar", "e"):
            if getattr(self, name) <= 0:
                raise DomainError(f"constant {name} must be positive")


CODATA = Constants()


@dataclass(frozen=True)
class DipoleParams:
    """Derived parameters of one Lorentz-oscillator dipole.

    m_eff follows the oscillator/quantum correspondence q^2/m_eff = 2*omega0*d0^2/hbar,
    i.e. m_eff = hbar/(2*omega0*y0^2), which makes the dipole-moment and
    classical-mass forms of the free-space decay rate agree identically.
    """

    q: float        # charge magnitude (C)
    y0: float       # maximum internal displacement (m)
    omega0: float   # angular resonance frequency (rad/s)
    m_eff: float    # effective mass (kg)
    d0: float       # initial dipole moment (C m), d0 = q*y0
    gamma0: float   # free-space decay rate (1/s)


def free_space_decay_rate(d: float, omega0: float) -> float:
    """Free-space SE decay rate of a dipole d at angular frequency omega0."""
    k = CODATA
    return d * d * omega0**3 / (3.0 * math.pi * k.eps0 * k.hbar * k.c**3)


def derive_dipole_params(q: float, y0: float, omega0: float) -> DipoleParams:
    """Derive all dipole parameters from charge, displacement and frequency.

    Arguments:
        q: charge magnitude (C), > 0
        y0: maximum internal displacement (m), > 0
        omega0: angular resonance frequency (rad/s), > 0
    """
    for name, val in (("q", q), ("y0", y0), ("omega0", omega0)):
        if not val > 0:
            raise DomainError(f"{name} must be positive, got {val!r}")
    d0 = q * y0
    m_eff = CODATA.hbar / (2.0 * omega0 * y0 * y0)
    gamma0 = free_space_decay_rate(d0, omega0)
    return DipoleParams(q=q, y0=y0, omega0=omega0, m_eff=m_eff, d0=d0, gamma0=gamma0)
