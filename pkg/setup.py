"""Build the optional compiled kernels.

The extension is marked optional: when Cython or a compiler is missing the
package still installs and falls back to the numpy kernels.
"""
import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

openmp = [] if sys.platform == "darwin" else ["-fopenmp"]

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "povm_duel._kernels",
                ["src/povm_duel/_kernels.pyx"],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
