"""Backend selection: compiled Cython kernels with a pure-Python fallback.

Set DIPOLESIM_BACKEND=python (or =compiled) to force a choice; by default the
compiled extension is used when importable. Both backends expose the same
functions and produce matching results (see tests/test_backend_parity.py and
benchmarks/bench_backends.py).
"""

from __future__ import annotations

import os

from . import _pycore

_requested = os.environ.get("DIPOLESIM_BACKEND", "").strip().lower()

if _requested in ("", "compiled"):
    try:
        from . import _core as _impl
        HAVE_COMPILED = True
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "DIPOLESIM_BACKEND=compiled but the extension is not built; "
                "run `python setup.py build_ext --inplace` or reinstall"
            )
        _impl = _pycore
        HAVE_COMPILED = False
elif _requested == "python":
    _impl = _pycore
    try:
        from . import _core  # noqa: F401
        HAVE_COMPILED = True
    except ImportError:
        HAVE_COMPILED = False
else:
    raise ValueError(f"unknown DIPOLESIM_BACKEND {_requested!r}")

BACKEND_NAME = _impl.BACKEND_NAME
EXCLUSION_RADIUS = _pycore.EXCLUSION_RADIUS

retarded_time = _impl.retarded_time
lw_eval = _impl.lw_eval
run_coupled = _impl.run_coupled


def get_backend(name: str | None = None):
    """Return the backend module by name ('python', 'compiled' or None=active)."""
    if name is None:
        return _impl
    if name == "python":
        return _pycore
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    if HAVE_COMPILED:
        names.insert(0, "compiled")
    return names
