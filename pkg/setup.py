"""Build script for the optional compiled kernel extension.

The package works without the extension (pure numpy/scipy fallbacks are
selected at import time); the extension is attempted and skipped with a
warning if no compiler or Cython is available.
"""
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rinlab._kernels._ckern",
                sources=["src/rinlab/_kernels/_ckern.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:
    warnings.warn(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)
