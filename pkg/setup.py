"""Builds the optional compiled kernels.

The package is fully functional without the extension: ontoforge._kernels
falls back to the pure-Python implementations when the compiled module is
absent. Set ONTOFORGE_PURE=1 to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ONTOFORGE_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/ontoforge/_kernels/_speed.pyx"], language_level=3
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
