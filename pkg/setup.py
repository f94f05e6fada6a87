"""Build script: compiles the optional Cython integrator kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time); set MODAL_STRENGTH_PURE=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MODAL_STRENGTH_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "modal_strength._kernels._rk4_cy",
                    sources=["src/modal_strength/_kernels/_rk4_cy.pyx"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
