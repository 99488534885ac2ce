"""Build the optional compiled core.

The package works without it: ``qkcompose._backend`` falls back to the
NumPy implementation in ``_pycore`` when ``_core`` cannot be imported.
Set ``QKCOMPOSE_NO_EXT=1`` to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("QKCOMPOSE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "qkcompose._core",
                    ["src/qkcompose/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
