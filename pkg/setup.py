"""Build script: compiles the optional Cython event-loop core.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed or skipped compile is not fatal.  Set
SOFTLORENTZ_NO_EXT=1 to skip the extension build entirely.

-ffp-contract=off keeps the compiled kernels bit-identical to the pure
Python reference (no fused multiply-add contraction).
"""

import os

from setuptools import setup

_PYX = "src/softlorentz/_kernels/_core.pyx"

ext_modules = []
if os.environ.get("SOFTLORENTZ_NO_EXT") != "1" and os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "softlorentz._kernels._core",
                    [_PYX],
                    # -ffp-contract=off: no fused multiply-add;
                    # -fno-builtin-sin/cos: stop gcc merging sin+cos into
                    # glibc sincos (1-ulp difference vs separate calls).
                    # Both are required for bit parity with the pure backend.
                    extra_compile_args=["-O3", "-ffp-contract=off",
                                        "-fno-builtin-sin",
                                        "-fno-builtin-cos"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
