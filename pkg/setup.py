"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/bitemper/_kernels_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
except Exception as exc:  # noqa: BLE001 - any build-chain failure is non-fatal
    warnings.warn(f"compiled kernels skipped ({exc}); using pure-python fallback")
    ext_modules = []

setup(ext_modules=ext_modules)
