"""Build script: compiles the optional grid-evaluation extension.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional and any build failure is
non-fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "clog._gridkernel",
                ["src/clog/_gridkernel.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
