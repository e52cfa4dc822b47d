"""Build the optional Cython kernels.

The package works without them: ``cruc._backend`` falls back to the
numpy/scipy implementation when ``cruc._kernels`` cannot be imported.
Set ``CRUC_NO_EXT=1`` to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CRUC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cruc._kernels",
                    ["src/cruc/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
