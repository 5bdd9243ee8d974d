"""Exact fields and potentials of arbitrarily moving point charges.

Implements the retarded-time root solve and the velocity/acceleration split of
the moving-charge electric field: the Coulomb (velocity) field falls as 1/R^2,
the radiation (acceleration) field as 1/R, and B = n_s x E / c, all evaluated
at the numerically solved emission time t_r = t - R_s(t_r)/c.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DipoleSimError
from .trajectory import TrajectoryHistory

__all__ = [
    "FieldSample",
    "GridFieldResult",
    "retarded_time",
    "lw_potentials",
    "lw_fields",
    "lw_fields_total",
    "field_on_grid",
]


@dataclass
class FieldSample:
    """Fields and potentials at one observation point and time.

    The total electric field is E_coul + E_rad by construction.
    """

    E_coul: np.ndarray
    E_rad: np.ndarray
    B: np.ndarray
    phi: float
    A: np.ndarray

    @property
    def E(self) -> np.ndarray:
        return self.E_coul + self.E_rad

    def __add__(self, other: "FieldSample") -> "FieldSample":
        return FieldSample(
            self.E_coul + other.E_coul,
            self.E_rad + other.E_rad,
            self.B + other.B,
            self.phi + other.phi,
            self.A + other.A,
        )

    @classmethod
    def zero(cls) -> "FieldSample":
        return cls(np.zeros(3), np.zeros(3), np.zeros(3), 0.0, np.zeros(3))


def _obs3(obs):
    o = np.asarray(obs, dtype=float)
    if o.shape != (3,):
        raise ValueError("observation point must be a 3-vector")
    return float(o[0]), float(o[1]), float(o[2])


def retarded_time(obs, t: float, traj: TrajectoryHistory) -> float:
    """Emission time t_r satisfying t_r = t - |obs - r_s(t_r)|/c."""
    ox, oy, oz = _obs3(obs)
    args = traj._flat()
    return _backend.retarded_time(*args, ox, oy, oz, t)


def _eval(obs, t, traj):
    ox, oy, oz = _obs3(obs)
    args = traj._flat()
    return _backend.lw_eval(traj.charge, *args, ox, oy, oz, t)


def lw_potentials(obs, t: float, traj: TrajectoryHistory) -> tuple[float, np.ndarray]:
    """Retarded scalar and vector potentials (phi, A) of one charge."""
    out = _eval(obs, t, traj)
    return out[9], np.array(out[10:13])


def lw_fields(obs, t: float, traj: TrajectoryHistory) -> FieldSample:
    """Coulomb/radiation field split, B, and potentials of one charge."""
    out = _eval(obs, t, traj)
    return FieldSample(
        E_coul=np.array(out[0:3]),
        E_rad=np.array(out[3:6]),
        B=np.array(out[6:9]),
        phi=out[9],
        A=np.array(out[10:13]),
    )


def lw_fields_total(obs, t: float, trajs) -> FieldSample:
    """Superposed fields of several charges at one observation point."""
    total = FieldSample.zero()
    for traj in trajs:
        total = total + lw_fields(obs, t, traj)
    return total


@dataclass
class GridFieldResult:
    """Per-point samples; failed points are None with the error recorded."""

    samples: list
    errors: list = field(default_factory=list)  # (grid index, exception)

    @property
    def ok(self) -> bool:
        return not self.errors


def field_on_grid(sources, grid, t: float, threads: int | None = None) -> GridFieldResult:
    """Superposed field samples on a list of observation points.

    Point failures (e.g. a grid point inside a source's exclusion radius) are
    reported with their grid index; the remaining points are unaffected. The
    result order matches the grid order regardless of thread count.
    """
    pts = [np.asarray(p, dtype=float) for p in grid]

    def one(p):
        return lw_fields_total(p, t, sources)

    samples: list = [None] * len(pts)
    errors = []
    if threads and threads > 1 and len(pts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(one, p) for p in pts]
        for i, fut in enumerate(futs):
            try:
                samples[i] = fut.result()
            except DipoleSimError as exc:
                errors.append((i, exc))
    else:
        for i, p in enumerate(pts):
            try:
                samples[i] = one(p)
            except DipoleSimError as exc:
                errors.append((i, exc))
    return GridFieldResult(samples=samples, errors=errors)
