import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dipolesim as ds
from dipolesim.constants import CODATA, derive_dipole_params


def test_gamma0_reference_value(ref):
    # 21.48 GHz at q = 10e, y0 = 1 nm, omega0 = 2*pi*200 THz
    assert ref.params.gamma0 == pytest.approx(2.148e10, rel=1e-3)


def test_m_eff_matches_direct_evaluation(ref):
    # independent evaluation of hbar/(2 omega0 y0^2)
    w0 = 2.0 * math.pi * 200e12
    expected = 1.054571817e-34 / (2.0 * w0 * 1e-9**2)
    assert ref.params.m_eff == pytest.approx(expected, rel=1e-12)
    assert ref.params.m_eff == pytest.approx(4.196008e-32, rel=1e-6)


def test_d0_identity(ref):
    assert ref.params.d0 == ref.params.q * ref.params.y0


def test_charge_scaling():
    base = derive_dipole_params(1e-18, 1e-9, 1e15)
    scaled = derive_dipole_params(3e-18, 1e-9, 1e15)
    assert scaled.d0 == pytest.approx(3.0 * base.d0, rel=1e-15)
    assert scaled.gamma0 == pytest.approx(9.0 * base.gamma0, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(q=st.floats(1e-21, 1e-16), y0=st.floats(1e-12, 1e-7),
       w0=st.floats(1e12, 1e17))
def test_decay_rate_forms_agree(q, y0, w0):
    # dipole-moment form vs classical-mass form of the free-space rate
    p = derive_dipole_params(q, y0, w0)
    mass_form = p.q**2 * p.omega0**2 / (
        6.0 * math.pi * CODATA.eps0 * p.m_eff * CODATA.c**3)
    assert mass_form == pytest.approx(p.gamma0, rel=1e-12)


def test_deterministic():
    a = derive_dipole_params(1e-18, 1e-9, 1e15)
    b = derive_dipole_params(1e-18, 1e-9, 1e15)
    assert a == b


@pytest.mark.parametrize("kwargs,name", [
    (dict(q=0.0, y0=1e-9, omega0=1e15), "q"),
    (dict(q=1e-18, y0=-1e-9, omega0=1e15), "y0"),
    (dict(q=1e-18, y0=1e-9, omega0=0.0), "omega0"),
])
def test_domain_errors_name_parameter(kwargs, name):
    with pytest.raises(ds.DomainError, match=name):
        derive_dipole_params(**kwargs)


def test_constants_positive():
    k = CODATA
    assert k.c > 0 and k.eps0 > 0 and k.hbar > 0 and k.e > 0
