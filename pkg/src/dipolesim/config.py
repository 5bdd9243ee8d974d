"""Config-file parsing: TOML with explicit unit suffixes on physical values.

Every physical quantity is a string "value unit", e.g. R0 = "50 nm" or
omega0 = "200 THz". Hz-family frequencies are ordinary frequencies and are
converted to angular (rad/s) by 2*pi; write the unit "rad/s" to bypass the
conversion and give an angular value directly. Relative units resolve against
derived quantities: "R0" (the static COM separation), "y0" (the dipole's own
maximum displacement), "g" (the analytic coherent coupling at omega0), and
"gamma0" (the free-space decay rate).

Unknown sections or keys are rejected with the offending line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .constants import CODATA, derive_dipole_params
from .errors import ConfigError
from .greens import coupling_rates
from .simulate import LorentzDipole, MechanicalDrive, SimulationConfig

__all__ = ["RunConfig", "parse_config", "write_run_meta"]

TWO_PI = 2.0 * math.pi

_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12,
         "fs": 1e-15, "as": 1e-18}
_FREQ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_CHARGE = {"C": 1.0, "e": CODATA.e}
_ANGLE = {"rad": 1.0, "deg": math.pi / 180.0}

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}

_SCHEMA = {
    "dipole": {"q", "y0", "omega0", "x", "y", "z", "polarization", "excited",
               "y_init"},
    "drive": {"R_M", "omega_M", "phase", "axis", "dipole"},
    "simulation": {"dt", "n_steps", "record_stride", "history", "window_rows",
                   "per_charge_field"},
    "spectrum": {"prominence", "dipole", "floquet_lines", "zones"},
    "floquet": {"L", "zones", "r_grid", "weight_floor"},
}


def _find_line(text: str, token: str) -> int | None:
    pat = re.compile(rf"^\s*\[?\s*{re.escape(token)}\b")
    for no, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return no
    return None


def _require(tbl, key, section, text):
    if key not in tbl:
        raise ConfigError(f"missing required key {key!r} in [{section}]",
                          line=_find_line(text, section))
    return tbl[key]


def _quantity(raw, kinds, where: str, text: str, context=None) -> float:
    """Parse "value unit" against the allowed unit kinds for this key."""
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        raise ConfigError(
            f"{where}: physical values need an explicit unit suffix "
            f"(got bare number {raw!r})",
            line=_find_line(text, where.split(".")[-1]),
        )
    if not isinstance(raw, str):
        raise ConfigError(f"{where}: expected a quantity string, got {raw!r}",
                          line=_find_line(text, where.split(".")[-1]))
    parts = raw.split()
    if len(parts) != 2:
        raise ConfigError(f"{where}: expected 'value unit', got {raw!r}",
                          line=_find_line(text, where.split(".")[-1]))
    try:
        value = float(parts[0])
    except ValueError:
        raise ConfigError(f"{where}: bad number {parts[0]!r}",
                          line=_find_line(text, where.split(".")[-1])) from None
    unit = parts[1]
    context = context or {}
    for kind in kinds:
        if kind == "length" and unit in _LENGTH:
            return value * _LENGTH[unit]
        if kind == "time" and unit in _TIME:
            return value * _TIME[unit]
        if kind == "angular" and unit in _FREQ:
            return value * _FREQ[unit] * TWO_PI  # ordinary -> angular
        if kind == "angular" and unit == "rad/s":
            return value
        if kind == "rate" and unit == "1/s":
            return value
        if kind == "charge" and unit in _CHARGE:
            return value * _CHARGE[unit]
        if kind == "angle" and unit in _ANGLE:
            return value * _ANGLE[unit]
        if kind == "relative" and unit in context:
            return value * context[unit]
    raise ConfigError(f"{where}: unit {unit!r} not valid here (value {raw!r})",
                      line=_find_line(text, where.split(".")[-1]))


def _axis(raw, where, text):
    if isinstance(raw, str):
        if raw not in _AXES:
            raise ConfigError(f"{where}: axis must be x, y, z or a 3-vector",
                              line=_find_line(text, where.split(".")[-1]))
        return _AXES[raw]
    vec = tuple(float(v) for v in raw)
    if len(vec) != 3:
        raise ConfigError(f"{where}: axis vector needs 3 components",
                          line=_find_line(text, where.split(".")[-1]))
    return vec


@dataclass
class RunConfig:
    """Fully resolved run settings in SI units."""

    dipoles: list                      # LorentzDipole instances
    params: list                       # DipoleParams per dipole
    dt: float
    n_steps: int
    record_stride: int = 10
    history: str = "full"
    window_rows: int | None = None
    per_charge_field: bool = False
    drive: MechanicalDrive | None = None
    drive_dipole: int = 0              # 0-based index carrying the drive
    # derived reference scales
    R0: float = 0.0
    g12: float = 0.0
    gamma0: float = 0.0
    omega0: float = 0.0
    # analysis options
    spectrum_prominence: float = 1e-3
    spectrum_dipole: int = 1           # 0-based index to transform
    spectrum_floquet_lines: bool = True
    spectrum_zones: float = 8.0
    floquet_L: int = 0                 # 0 = automatic truncation
    floquet_zones: float = 3.0
    floquet_r_grid: str = "0:0.8:0.01"
    floquet_weight_floor: float = 1e-6

    def simulation_config(self, n_steps: int | None = None,
                          record_stride: int | None = None,
                          history: str | None = None) -> SimulationConfig:
        return SimulationConfig(
            dipoles=list(self.dipoles),
            dt=self.dt,
            n_steps=int(n_steps if n_steps is not None else self.n_steps),
            record_stride=int(record_stride if record_stride is not None
                              else self.record_stride),
            history=history or self.history,
            window_rows=self.window_rows,
            per_charge_field=self.per_charge_field,
        )

    def r_grid(self, spec: str | None = None) -> np.ndarray:
        spec = spec or self.floquet_r_grid
        try:
            start, stop, step = (float(x) for x in spec.split(":"))
        except ValueError:
            raise ConfigError(f"bad r-grid spec {spec!r}; expected start:stop:step") from None
        return np.arange(start, stop + 0.5 * step, step)


def parse_config(path) -> RunConfig:
    """Parse and resolve a config file; raises ConfigError with diagnostics."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error in {path}: {exc}") from None
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()

    for section in data:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]",
                              line=_find_line(text, section))

    # --- dipoles -------------------------------------------------------------
    dip_tables = data.get("dipole")
    if not dip_tables:
        raise ConfigError("need at least one [dipole.N] section")
    entries = []
    for label in sorted(dip_tables, key=lambda s: int(s)):
        tbl = dip_tables[label]
        for key in tbl:
            if key not in _SCHEMA["dipole"]:
                raise ConfigError(f"unknown key {key!r} in [dipole.{label}]",
                                  line=_find_line(text, key))
        where = f"dipole.{label}"
        q = _quantity(_require(tbl, "q", where, text), ("charge",),
                      f"{where}.q", text)
        y0 = _quantity(_require(tbl, "y0", where, text), ("length",),
                       f"{where}.y0", text)
        omega0 = _quantity(_require(tbl, "omega0", where, text), ("angular",),
                           f"{where}.omega0", text)
        params = derive_dipole_params(q, y0, omega0)
        pos = tuple(
            _quantity(tbl[k], ("length",), f"{where}.{k}", text)
            if k in tbl else 0.0
            for k in ("x", "y", "z")
        )
        pol = _axis(tbl.get("polarization", "y"), f"{where}.polarization", text)
        excited = bool(tbl.get("excited", False))
        y_init = None
        if "y_init" in tbl:
            y_init = _quantity(tbl["y_init"], ("length", "relative"),
                               f"{where}.y_init", text, context={"y0": y0})
        entries.append((params, pos, pol, excited, y_init))

    params0 = entries[0][0]
    omega0 = params0.omega0
    gamma0 = params0.gamma0

    # Reference separation and analytic coupling for relative units.
    if len(entries) >= 2:
        r1 = np.array(entries[0][1])
        r2 = np.array(entries[1][1])
        R0 = float(np.linalg.norm(r1 - r2))
        d1 = entries[0][0].d0 * np.array(entries[0][2])
        d2 = entries[1][0].d0 * np.array(entries[1][2])
        g12 = coupling_rates(d1, d2, r1, r2, omega0).g12
    else:
        R0 = 0.0
        g12 = 0.0

    # --- drive ---------------------------------------------------------------
    drive = None
    drive_dipole = 0
    if "drive" in data:
        tbl = data["drive"]
        for key in tbl:
            if key not in _SCHEMA["drive"]:
                raise ConfigError(f"unknown key {key!r} in [drive]",
                                  line=_find_line(text, key))
        ctx = {"R0": R0, "g": g12, "gamma0": gamma0, "omega0": omega0}
        if R0 <= 0.0 and isinstance(tbl.get("R_M"), str) and "R0" in tbl["R_M"]:
            raise ConfigError("R0-relative drive amplitude needs two dipoles")
        R_M = _quantity(_require(tbl, "R_M", "drive", text),
                        ("length", "relative"), "drive.R_M", text, context=ctx)
        omega_M = _quantity(_require(tbl, "omega_M", "drive", text),
                            ("angular", "relative"), "drive.omega_M", text,
                            context=ctx)
        phase = _quantity(tbl.get("phase", "0 rad"), ("angle",),
                          "drive.phase", text)
        axis = _axis(tbl.get("axis", "x"), "drive.axis", text)
        drive_dipole = int(tbl.get("dipole", 1)) - 1
        if not 0 <= drive_dipole < len(entries):
            raise ConfigError("drive.dipole out of range",
                              line=_find_line(text, "dipole"))
        base = np.array(entries[drive_dipole][1])
        R0_drive = float(np.linalg.norm(base))
        if R0_drive <= 0.0:
            raise ConfigError(
                "the driven dipole must sit away from the origin so the drive "
                "axis separation R0 is well defined"
            )
        off_axis = base - (base @ np.array(axis)) * np.array(axis)
        if np.linalg.norm(off_axis) > 1e-12 * R0_drive:
            raise ConfigError(
                "the driven dipole's rest position must lie on the drive axis"
            )
        drive = MechanicalDrive(R0=float(base @ np.array(axis)), R_M=R_M,
                                omega_M=omega_M, phase=phase, axis=axis)

    dipoles = []
    for i, (params, pos, pol, excited, y_init) in enumerate(entries):
        if drive is not None and i == drive_dipole:
            dipoles.append(LorentzDipole(params=params, drive=drive,
                                         polarization=pol, excited=excited,
                                         y_init=y_init))
        else:
            dipoles.append(LorentzDipole(params=params, position=pos,
                                         polarization=pol, excited=excited,
                                         y_init=y_init))

    # --- simulation ----------------------------------------------------------
    if "simulation" not in data:
        raise ConfigError("missing [simulation] section")
    sim = data["simulation"]
    for key in sim:
        if key not in _SCHEMA["simulation"]:
            raise ConfigError(f"unknown key {key!r} in [simulation]",
                              line=_find_line(text, key))
    dt = _quantity(_require(sim, "dt", "simulation", text), ("time",),
                   "simulation.dt", text)
    n_steps = int(_require(sim, "n_steps", "simulation", text))
    cfg = RunConfig(
        dipoles=dipoles,
        params=[e[0] for e in entries],
        dt=dt,
        n_steps=n_steps,
        record_stride=int(sim.get("record_stride", 10)),
        history=str(sim.get("history", "full")),
        window_rows=(int(sim["window_rows"]) if "window_rows" in sim else None),
        per_charge_field=bool(sim.get("per_charge_field", False)),
        drive=drive,
        drive_dipole=drive_dipole,
        R0=R0, g12=g12, gamma0=gamma0, omega0=omega0,
    )

    if "spectrum" in data:
        tbl = data["spectrum"]
        for key in tbl:
            if key not in _SCHEMA["spectrum"]:
                raise ConfigError(f"unknown key {key!r} in [spectrum]",
                                  line=_find_line(text, key))
        cfg.spectrum_prominence = float(tbl.get("prominence", 1e-3))
        cfg.spectrum_dipole = int(tbl.get("dipole", 2)) - 1
        cfg.spectrum_floquet_lines = bool(tbl.get("floquet_lines", True))
        cfg.spectrum_zones = float(tbl.get("zones", 8.0))
    if "floquet" in data:
        tbl = data["floquet"]
        for key in tbl:
            if key not in _SCHEMA["floquet"]:
                raise ConfigError(f"unknown key {key!r} in [floquet]",
                                  line=_find_line(text, key))
        cfg.floquet_L = int(tbl.get("L", 0))
        cfg.floquet_zones = float(tbl.get("zones", 3.0))
        cfg.floquet_r_grid = str(tbl.get("r_grid", "0:0.8:0.01"))
        cfg.floquet_weight_floor = float(tbl.get("weight_floor", 1e-6))

    # Validate invariants the simulation relies on.
    cfg.simulation_config(n_steps=0)
    return cfg


def write_run_meta(cfg: RunConfig, path, n_steps: int, record_stride: int,
                   history: str, version: str, backend: str) -> None:
    """Write the resolved parameters as a re-parseable config (SI units)."""
    lines = [
        f"# dipolesim {version} resolved run parameters (backend: {backend})",
        f"# derived: gamma0 = {cfg.gamma0:.17g} 1/s, g12 = {cfg.g12:.17g} rad/s,"
        f" R0 = {cfg.R0:.17g} m",
    ]
    for i, dip in enumerate(cfg.dipoles, start=1):
        p = dip.params
        lines += [
            f"[dipole.{i}]",
            f'q = "{p.q:.17g} C"',
            f'y0 = "{p.y0:.17g} m"',
            f'omega0 = "{p.omega0:.17g} rad/s"',
        ]
        if dip.drive is None:
            pos = dip.com_at(0.0)
        else:  # rest position: the drive's R0 along its axis
            pos = dip.drive.R0 * np.array(dip.drive.axis)
        lines += [
            f'x = "{pos[0]:.17g} m"',
            f'y = "{pos[1]:.17g} m"',
            f'z = "{pos[2]:.17g} m"',
        ]
        lines += [
            f"polarization = [{dip.polarization[0]:.17g}, "
            f"{dip.polarization[1]:.17g}, {dip.polarization[2]:.17g}]",
            f'y_init = "{dip.y_init:.17g} m"',
            "",
        ]
    if cfg.drive is not None:
        d = cfg.drive
        lines += [
            "[drive]",
            f'R_M = "{d.R_M:.17g} m"',
            f'omega_M = "{d.omega_M:.17g} rad/s"',
            f'phase = "{d.phase:.17g} rad"',
            f"axis = [{d.axis[0]:.17g}, {d.axis[1]:.17g}, {d.axis[2]:.17g}]",
            f"dipole = {cfg.drive_dipole + 1}",
            "",
        ]
    lines += [
        "[simulation]",
        f'dt = "{cfg.dt:.17g} s"',
        f"n_steps = {n_steps}",
        f"record_stride = {record_stride}",
        f'history = "{history}"',
        f"per_charge_field = {'true' if cfg.per_charge_field else 'false'}",
        "",
        "[spectrum]",
        f"prominence = {cfg.spectrum_prominence:.17g}",
        f"dipole = {cfg.spectrum_dipole + 1}",
        f"floquet_lines = {'true' if cfg.spectrum_floquet_lines else 'false'}",
        f"zones = {cfg.spectrum_zones:.17g}",
        "",
        "[floquet]",
        f"L = {cfg.floquet_L}",
        f"zones = {cfg.floquet_zones:.17g}",
        f'r_grid = "{cfg.floquet_r_grid}"',
        f"weight_floor = {cfg.floquet_weight_floor:.17g}",
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
