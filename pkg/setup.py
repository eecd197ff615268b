"""Build script: compiles the optional Cython kernel core.

Set OPINEQ_NO_EXT=1 to skip compilation; the package then runs on the
pure-numpy kernel fallback selected at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("OPINEQ_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "opineq._ckernels",
                    sources=["src/opineq/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
