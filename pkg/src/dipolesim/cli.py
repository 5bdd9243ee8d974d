"""Command-line interface: simulate, spectrum, floquet, validate.

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 I/O error,
4 numerical/physics error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND_NAME
from .config import parse_config, write_run_meta
from .errors import ConfigError, DipoleSimError, PhysicsError
from .floquet import CoupledHOParams, DriveSpec, FloquetProblem, quasienergies, sweep
from .simulate import run_simulation
from .spectra import (
    compare_to_floquet,
    find_peaks,
    windowed_fft,
    write_peaks_csv,
    write_spectrum_csv,
)
from .validation import run_validation


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dipolesim",
        description="Direct space-time simulation of radiatively coupled "
                    "oscillating dipoles, with Floquet and Green-function "
                    "cross-checks.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation from a config file")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default="out", help="output directory")
    sim.add_argument("--steps", type=float, default=None,
                     help="override n_steps (desk-scale runs)")
    sim.add_argument("--stride", type=int, default=None,
                     help="override record_stride")
    sim.add_argument("--history", choices=("full", "window"), default=None)
    sim.add_argument("--threads", type=int, default=os.cpu_count(),
                     help="worker threads for parallel sections")

    spc = sub.add_parser("spectrum", help="FFT + peaks of a simulated series")
    spc.add_argument("--config", required=True)
    spc.add_argument("--input", default=None,
                     help="timeseries.csv (default <out>/timeseries.csv)")
    spc.add_argument("--out", default="out")
    spc.add_argument("--dipole", type=int, default=None,
                     help="1-based dipole whose moment is transformed")
    spc.add_argument("--no-floquet", action="store_true",
                     help="skip the Floquet line comparison")
    spc.add_argument("--tolerance-bins", type=float, default=1.0)

    flq = sub.add_parser("floquet", help="quasienergy sweep over drive amplitude")
    flq.add_argument("--config", required=True)
    flq.add_argument("--out", default="out")
    flq.add_argument("--r-grid", default=None, help="start:stop:step")
    flq.add_argument("--threads", type=int, default=os.cpu_count())

    sub.add_parser("validate", help="run the built-in oracle suite")
    return ap


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    n_steps = int(args.steps) if args.steps is not None else cfg.n_steps
    stride = args.stride if args.stride is not None else cfg.record_stride
    history = args.history or cfg.history
    sim_cfg = cfg.simulation_config(n_steps=n_steps, record_stride=stride,
                                    history=history)
    os.makedirs(args.out, exist_ok=True)
    print(f"[simulate] backend={BACKEND_NAME} dipoles={len(cfg.dipoles)} "
          f"steps={n_steps} dt={cfg.dt:g}s stride={stride}")
    result = run_simulation(sim_cfg)
    ts_path = os.path.join(args.out, "timeseries.csv")
    result.to_csv(ts_path)
    write_run_meta(cfg, os.path.join(args.out, "run_meta.toml"),
                   n_steps=n_steps, record_stride=stride, history=history,
                   version=__version__, backend=BACKEND_NAME)
    print(f"[simulate] wrote {ts_path} ({result.times.size} rows)")
    return 0


def _load_series(path, column: str):
    with open(path, "r") as fh:
        header = fh.readline().strip().split(",")
    if column not in header:
        raise ConfigError(f"column {column!r} not found in {path} "
                          f"(have {header})")
    data = np.loadtxt(path, delimiter=",", skiprows=1,
                      usecols=(0, header.index(column)))
    return data[:, 0], data[:, 1]


def _cmd_spectrum(args) -> int:
    cfg = parse_config(args.config)
    path = args.input or os.path.join(args.out, "timeseries.csv")
    dip = (args.dipole - 1) if args.dipole is not None else cfg.spectrum_dipole
    times, series = _load_series(path, f"d_{dip + 1}")
    dt_eff = float(times[1] - times[0])
    spec = find_peaks(windowed_fft(series, dt_eff),
                      prominence=cfg.spectrum_prominence)
    os.makedirs(args.out, exist_ok=True)
    omega_M = cfg.drive.omega_M if cfg.drive is not None else cfg.g12
    write_spectrum_csv(spec, os.path.join(args.out, "spectrum.csv"),
                       cfg.omega0, omega_M)
    write_peaks_csv(spec, os.path.join(args.out, "peaks.csv"),
                    cfg.omega0, omega_M)
    print(f"[spectrum] {len(spec.peaks)} peaks "
          f"(prominence >= {cfg.spectrum_prominence:g} of max)")
    if cfg.spectrum_floquet_lines and not args.no_floquet and cfg.g12 > 0:
        ho = CoupledHOParams(cfg.omega0, cfg.g12)
        r = (cfg.drive.R_M / cfg.drive.R0) if cfg.drive is not None else 0.0
        drive = DriveSpec(r=r, omega_M=omega_M)
        prob = FloquetProblem.build(ho, drive,
                                    L=cfg.floquet_L or None)
        fspec = quasienergies(prob, zones=cfg.spectrum_zones)
        report = compare_to_floquet(
            spec, fspec.bright_lines(cfg.floquet_weight_floor),
            tolerance_bins=args.tolerance_bins)
        with open(os.path.join(args.out, "floquet_match.txt"), "w") as fh:
            fh.write(report.format() + "\n")
        print(report.format())
    return 0


def _cmd_floquet(args) -> int:
    cfg = parse_config(args.config)
    if cfg.g12 <= 0:
        raise ConfigError("floquet sweep needs two coupled dipoles")
    ho = CoupledHOParams(cfg.omega0, cfg.g12)
    omega_M = cfg.drive.omega_M if cfg.drive is not None else cfg.g12
    grid = cfg.r_grid(args.r_grid)
    res = sweep(ho, grid, omega_M, L=cfg.floquet_L or None,
                zones=cfg.floquet_zones, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "floquet_sweep.csv")
    res.to_csv(out_path)
    n_ok = sum(s is not None for s in res.spectra)
    print(f"[floquet] {n_ok}/{len(grid)} sweep points -> {out_path}")
    for idx, exc in res.failures:
        print(f"[floquet] point r={grid[idx]:.4f} failed: {exc}")
    return 0 if n_ok == len(grid) else 4


def _cmd_validate() -> int:
    checks = run_validation()
    width = max(len(c.name) for c in checks)
    ok = True
    for c in checks:
        ok &= c.passed
        print(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL'}  {c.detail}")
    print(f"validate: {'OK' if ok else 'FAILED'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "spectrum":
            return _cmd_spectrum(args)
        if args.command == "floquet":
            return _cmd_floquet(args)
        if args.command == "validate":
            return _cmd_validate()
        raise AssertionError(args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsError as exc:
        print(f"physics/numerics error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except DipoleSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
