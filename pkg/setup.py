"""Build script for the optional compiled simplex kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the build therefore tolerates a missing Cython or
a failing C toolchain instead of aborting the install.  Set SAFECUT_NO_EXT=1
to skip the extension build entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing
            print(f"safecut: skipping compiled kernel ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"safecut: skipping {ext.name} ({exc})", file=sys.stderr)


extensions = []
if os.environ.get("SAFECUT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "safecut._simplex_cy",
                    ["src/safecut/_simplex_cy.pyx"],
                    include_dirs=[np.get_include()],
                    # -ffp-contract=off: no fused multiply-add, so the compiled
                    # kernel is bit-identical to the numpy fallback.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError as exc:
        print(f"safecut: Cython/numpy unavailable, no compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
