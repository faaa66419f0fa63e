"""Build script for the optional compiled kernels.

The package imports and runs without the extension; ``fairrank.kernels``
falls back to the pure-Python implementations when it is missing.
"""
import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("FAIRRANK_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "fairrank._kernels_ext",
                ["src/fairrank/_kernels_ext.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
