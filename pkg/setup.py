"""Build script. The compiled kernel extension is optional: if Cython (or a
C compiler) is unavailable the package installs anyway and falls back to the
pure numpy kernels at import time."""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "funlyz._kernels",
                ["src/funlyz/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError as exc:
    print(f"funlyz: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
