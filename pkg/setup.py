"""Build script: compiles the optional Cython kernel core.

The package is fully functional without the extension (the numpy fallback in
sheetlimit._pykernels is selected at import time), so the extension is marked
optional and a failed compile does not fail the install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "sheetlimit._ckernels",
                ["src/sheetlimit/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
