"""Build the optional bit-twiddling extension.

The package is fully functional without the extension (a pure-Python
twin of the kernel is selected at import time); building it just makes
the subset-search hot paths much faster.

    pip install -e . --no-build-isolation
    # or, in-place for a source checkout:
    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("dedcqa._bitkernel", sources=["src/dedcqa/_bitkernel.pyx"])],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
