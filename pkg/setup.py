"""Build script for the compiled singular-value kernels.

The package works without the extension (a NumPy fallback is selected at
import time); the extension exists because shift-grid scans spend nearly
all of their time inside the smallest-singular-value iteration.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "nonherm._kernels._smin_cy",
        sources=["src/nonherm/_kernels/_smin_cy.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
