"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""

import platform
import sys

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        print("twinlab: Cython/numpy unavailable at build time; "
              "skipping compiled kernels", file=sys.stderr)
        return []
    cflags = ["-O3", "-funroll-loops"]
    if platform.machine() in ("x86_64", "AMD64"):
        # without this, __builtin_popcountll lowers to a libgcc call
        cflags.append("-mpopcnt")
    ext = Extension(
        "twinlab._kernels_cy",
        ["src/twinlab/_kernels_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=cflags,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


try:
    setup(ext_modules=_extensions())
except SystemExit:
    raise
except Exception as exc:  # compile failure: fall back to pure python
    print(f"twinlab: compiled kernels failed to build ({exc}); "
          "installing pure-python fallback only", file=sys.stderr)
    setup(ext_modules=[])
