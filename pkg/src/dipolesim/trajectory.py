"""Trajectory histories of point charges, queryable at arbitrary past times.

A history stores (position, velocity, acceleration) at uniform spacing dt and
answers interpolated queries: cubic Hermite on position (using the stored
velocities), the Hermite derivative for velocity, linear for acceleration.
Before the first sample the charge is taken static at its initial position
with zero velocity and acceleration.

Histories keep every sample by default. Passing max_rows bounds memory for
long runs: once full, the oldest half is dropped; queries before the retained
window then raise HorizonError (retarded lookups stay within the light horizon
between sources and observation points, which the caller must keep inside
max_rows//2 samples).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import _pycore
from .constants import CODATA
from .errors import DomainError

__all__ = ["ChargeState", "TrajectoryHistory"]


@dataclass(frozen=True)
class ChargeState:
    """Kinematic state of a point charge at one instant."""

    t: float
    r: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        speed = float(np.linalg.norm(self.v))
        if speed >= CODATA.c:
            raise DomainError(f"charge speed {speed:.6e} m/s is not below c")


class TrajectoryHistory:
    """Append-only record of one charge's motion at fixed time spacing."""

    def __init__(self, charge: float, dt: float, t0: float = 0.0,
                 max_rows: int | None = None):
        if dt <= 0:
            raise DomainError("dt must be positive")
        if max_rows is not None and max_rows < 8:
            raise DomainError("max_rows must be at least 8")
        self.charge = float(charge)
        self.dt = float(dt)
        self._t0 = float(t0)
        self._max_rows = max_rows
        self._cap = 64 if max_rows is None else max_rows
        self._r = np.zeros((self._cap, 3))
        self._v = np.zeros((self._cap, 3))
        self._a = np.zeros((self._cap, 3))
        self._count = 0
        self._pre = np.zeros(3)
        self._allow_pre = True

    # -- construction helpers -------------------------------------------------

    @classmethod
    def static(cls, charge: float, position, dt: float = 1e-15, t0: float = 0.0,
               n: int = 2) -> "TrajectoryHistory":
        """History of a charge at rest at `position` for n samples."""
        hist = cls(charge, dt, t0)
        pos = np.asarray(position, dtype=float)
        zero = np.zeros(3)
        for _ in range(max(2, n)):
            hist.append(pos, zero, zero)
        return hist

    @classmethod
    def from_function(cls, charge: float, r_func, t0: float, dt: float, n: int,
                      v_func=None, a_func=None,
                      max_rows: int | None = None) -> "TrajectoryHistory":
        """Sample a prescribed motion r_func(t) -> (3,) at n uniform times.

        Velocity/acceleration callables default to central differences of
        r_func with step dt*1e-3.
        """
        if n < 2:
            raise DomainError("need at least 2 samples")
        h = dt * 1e-3
        if v_func is None:
            v_func = lambda t: (np.asarray(r_func(t + h)) - np.asarray(r_func(t - h))) / (2 * h)
        if a_func is None:
            a_func = lambda t: (np.asarray(v_func(t + h)) - np.asarray(v_func(t - h))) / (2 * h)
        hist = cls(charge, dt, t0, max_rows=max_rows)
        for i in range(n):
            t = t0 + i * dt
            hist.append(r_func(t), v_func(t), a_func(t))
        return hist

    # -- mutation --------------------------------------------------------------

    def append(self, r, v, a) -> None:
        """Append the state at the next sample time t0 + count*dt."""
        if self._count == self._cap:
            if self._max_rows is None:
                self._grow()
            else:
                self._compact()
        i = self._count
        self._r[i] = r
        self._v[i] = v
        self._a[i] = a
        if i == 0:
            self._pre = self._r[0].copy()
        speed = float(np.linalg.norm(self._v[i]))
        if speed >= CODATA.c:
            raise DomainError(f"charge speed {speed:.6e} m/s is not below c")
        self._count += 1

    def append_state(self, state: ChargeState) -> None:
        expected = self._t0 + self._count * self.dt
        if abs(state.t - expected) > 1e-9 * self.dt:
            raise DomainError(
                f"state time {state.t!r} breaks the uniform spacing "
                f"(expected {expected!r})"
            )
        self.append(state.r, state.v, state.a)

    def _grow(self):
        new_cap = self._cap * 2
        for name in ("_r", "_v", "_a"):
            arr = getattr(self, name)
            new = np.zeros((new_cap, 3))
            new[: self._cap] = arr
            setattr(self, name, new)
        self._cap = new_cap

    def _compact(self):
        keep = self._cap // 2
        drop = self._cap - keep
        for arr in (self._r, self._v, self._a):
            arr[:keep] = arr[drop:]
        self._t0 += drop * self.dt
        self._count = keep
        self._allow_pre = False

    # -- queries ----------------------------------------------------------------

    @property
    def count(self) -> int:
        return self._count

    @property
    def t0(self) -> float:
        """Time of the first retained sample."""
        return self._t0

    @property
    def t_last(self) -> float:
        return self._t0 + (self._count - 1) * self.dt

    @property
    def pre_history(self) -> ChargeState:
        """Static state assumed for all t < t0 (full-retention histories)."""
        return ChargeState(self._t0, self._pre.copy(), np.zeros(3), np.zeros(3))

    def times(self) -> np.ndarray:
        return self._t0 + self.dt * np.arange(self._count)

    def positions(self) -> np.ndarray:
        return self._r[: self._count].copy()

    def velocities(self) -> np.ndarray:
        return self._v[: self._count].copy()

    def accelerations(self) -> np.ndarray:
        return self._a[: self._count].copy()

    def _flat(self):
        """Backend argument tuple (flat views; no copies)."""
        n = self._count
        return (
            self._r[:n].reshape(-1), self._v[:n].reshape(-1),
            self._a[:n].reshape(-1), n, self._t0, self.dt,
            float(self._pre[0]), float(self._pre[1]), float(self._pre[2]),
            self._allow_pre,
        )

    def state_at(self, t: float) -> ChargeState:
        """Interpolated state at any time up to the latest sample."""
        if self._count == 0:
            raise DomainError("empty history")
        if t > self.t_last + 1e-9 * self.dt:
            raise DomainError(f"query time {t!r} is beyond the last sample")
        rf, vf, af, n, t0, dt, px, py, pz, allow = self._flat()
        st = _pycore._interp(rf, vf, af, n, t0, dt, px, py, pz, allow, t)
        return ChargeState(t, np.array(st[0:3]), np.array(st[3:6]),
                           np.array(st[6:9]))

    @classmethod
    def _from_arrays(cls, charge, dt, t0, r, v, a, pre, allow_pre):
        hist = cls(charge, dt, t0)
        hist._r = np.ascontiguousarray(r, dtype=float)
        hist._v = np.ascontiguousarray(v, dtype=float)
        hist._a = np.ascontiguousarray(a, dtype=float)
        hist._count = hist._r.shape[0]
        hist._cap = hist._count
        hist._pre = np.asarray(pre, dtype=float)
        hist._allow_pre = allow_pre
        return hist
