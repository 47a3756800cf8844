"""Build hook for the compiled SAT core.

The extension is optional: when Cython or a C++ toolchain is unavailable the
package installs pure-Python only and forestcf.sat falls back at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "forestcf.sat._core",
                ["src/forestcf/sat/_core.pyx"],
                language="c++",
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
