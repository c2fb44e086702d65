"""Builds the optional compiled kernels.

The package is fully functional without them (a numpy fallback is selected
at import time); when Cython and a C compiler are present the extension is
compiled, otherwise the build continues with a notice.

    python setup.py build_ext --inplace
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to the pure backend instead of failing."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            print(f"hiertax: compiled kernels skipped ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"hiertax: compiled kernels skipped ({exc}); using numpy fallback")


ext_modules = []
if os.environ.get("HIERTAX_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/hiertax/_kernels/_speedups.pyx"],
            language_level="3",
        )
    except ImportError:
        print("hiertax: Cython not available; compiled kernels skipped")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
