"""Build script for the compiled field-evaluation kernel.

The extension is optional: set DIPOLESIM_NO_EXT=1 to install the pure-Python
package only (the backend falls back automatically at import time).
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("DIPOLESIM_NO_EXT") == "1":
        return []
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "dipolesim._backend._core",
        ["src/dipolesim/_backend/_core.pyx"],
        include_dirs=[numpy.get_include()],
        # Bit-compatibility with the pure-Python reference backend:
        # no fused multiply-adds, and no sin+cos -> sincos combining
        # (glibc's sincos rounds differently from sin/cos by 1 ulp).
        extra_compile_args=["-O3", "-ffp-contract=off",
                            "-fno-builtin-sin", "-fno-builtin-cos"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
