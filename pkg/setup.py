"""Build shim for the compiled simulation kernel.

The extension is optional: if it fails to build (no compiler, no Cython),
the package installs anyway and duelbench._kernels falls back to the pure
Python twin at import time.
"""

import os

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    numpy = None

if numpy is not None and os.path.exists("src/duelbench/_kernels_cy.pyx"):
    extensions = cythonize(
        [
            Extension(
                "duelbench._kernels_cy",
                sources=["src/duelbench/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off: the fallback backend is held to
                # bit-identical output, so the compiler must not fuse
                # multiply-adds that numpy performs as separate roundings.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level="3",
    )
else:
    extensions = []

setup(ext_modules=extensions)
