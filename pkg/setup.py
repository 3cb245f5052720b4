"""Build script: compiles the optional metrics kernels extension.

The package works without the extension (a pure-Python fallback is selected
at import time); set TWEETFUNNEL_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TWEETFUNNEL_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/tweetfunnel/metrics/_kernels.pyx"],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
