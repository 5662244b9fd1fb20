"""Build script: compiles the optional Cython integration kernel.

If the extension fails to build (no compiler, no Cython) the package
still installs and falls back to the pure-Python kernel at import time.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "agrospray._kernels._core",
                ["src/agrospray/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython/numpy unavailable at build time; skipping compiled kernel",
          file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
