"""Build script: compiles the optional Monte Carlo kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures are downgraded to a warning rather
than aborting the install.
"""

import os
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # the kernels draw randomness through numpy's C distribution functions,
    # shipped as a static library next to the random package
    npyrandom_dir = os.path.join(os.path.dirname(np.random.__file__), "lib")

    ext = Extension(
        "diffctrl.sim._simkernels",
        sources=["src/diffctrl/sim/_simkernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    ext_modules = cythonize([ext], language_level="3")
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    warnings.warn(f"building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
