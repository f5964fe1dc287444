"""Build script for the optional compiled kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time), so the extension is marked optional: a missing compiler
degrades the install instead of failing it.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "cmvwalk._core",
    ["src/cmvwalk/_core.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level="3"))
