"""Build script for the optional compiled kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it makes the particle-advection inner loop roughly
an order of magnitude faster.  Set FLOEDA_NO_EXT=1 to skip compilation.
"""

import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("FLOEDA_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "floeda._kernels._core",
                ["src/floeda/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
