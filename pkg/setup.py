"""Build script: compiles the hot-loop kernels when Cython and a C compiler
are available, otherwise installs with the pure-Python fallback only."""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """Never fail the install over the extension; the package falls back to
    the pure-Python kernels at import time."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); "
                          "pure-Python fallback will be used")


ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [Extension("droneradio._core", ["src/droneradio/_core.pyx"])],
        language_level=3,
    )
else:
    warnings.warn("Cython not available; building without compiled kernels")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
