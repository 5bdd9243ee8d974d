"""Shared fixtures: reference dipole parameters and the desk-scale runs reused
by the acceptance suite (session scope; each run executes once)."""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np
import pytest

import dipolesim as ds

DT = 1e-17


@pytest.fixture(scope="session")
def ref():
    """Reference pair: q = 10e, y0 = 1 nm, 200 THz, s-polarized, 50 nm apart."""
    params = ds.derive_dipole_params(10 * ds.CODATA.e, 1e-9,
                                     2.0 * math.pi * 200e12)
    R0 = 50e-9
    d = np.array([0.0, params.d0, 0.0])
    rates = ds.coupling_rates(d, d, [R0, 0, 0], [0, 0, 0], params.omega0)
    return SimpleNamespace(params=params, R0=R0, rates=rates, g=rates.g12,
                           omega0=params.omega0, gamma0=params.gamma0)


def _pair_config(ref, n_steps, drive=None):
    if drive is None:
        d1 = ds.LorentzDipole(params=ref.params, position=(ref.R0, 0, 0),
                              excited=True)
    else:
        d1 = ds.LorentzDipole(params=ref.params, drive=drive, excited=True)
    d2 = ds.LorentzDipole(params=ref.params, position=(0, 0, 0))
    return ds.SimulationConfig(dipoles=[d1, d2], dt=DT, n_steps=n_steps,
                               record_stride=10, history="window")


@pytest.fixture(scope="session")
def run_single(ref):
    """One free dipole, 2e6 steps (decay-rate criterion)."""
    d1 = ds.LorentzDipole(params=ref.params, position=(0, 0, 0), excited=True)
    cfg = ds.SimulationConfig(dipoles=[d1], dt=DT, n_steps=2_000_000,
                              record_stride=10, history="window")
    return ds.run_simulation(cfg)


@pytest.fixture(scope="session")
def run_static(ref):
    """Undriven pair, 4e6 steps (resolves the polariton doublet cleanly)."""
    return ds.run_simulation(_pair_config(ref, 4_000_000))


@pytest.fixture(scope="session")
def run_drive_slow(ref):
    """Driven pair, R_M = 0.1 R0, omega_M = g, 2e6 steps."""
    drive = ds.MechanicalDrive(R0=ref.R0, R_M=0.1 * ref.R0, omega_M=ref.g)
    return ds.run_simulation(_pair_config(ref, 2_000_000, drive))


@pytest.fixture(scope="session")
def run_drive_fast(ref):
    """Driven pair, R_M = 0.1 R0, omega_M = 5 g, 4e6 steps."""
    drive = ds.MechanicalDrive(R0=ref.R0, R_M=0.1 * ref.R0, omega_M=5 * ref.g)
    return ds.run_simulation(_pair_config(ref, 4_000_000, drive))


@pytest.fixture(scope="session")
def run_drive_large(ref):
    """Driven pair, R_M = 0.35 R0, omega_M = 5 g, 2e6 steps."""
    drive = ds.MechanicalDrive(R0=ref.R0, R_M=0.35 * ref.R0, omega_M=5 * ref.g)
    return ds.run_simulation(_pair_config(ref, 2_000_000, drive))
