"""Build glue for the optional compiled integrator kernel.

The package is pure Python except for one hot loop (the radial RK4
kernel).  When Cython and a C toolchain are present the extension is
built; when either is missing, or compilation fails, the build still
succeeds and `kelvinasym.radial` selects its pure-Python fallback at
import time.  Both kernels implement identical arithmetic, so the
extension changes speed only, never results.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "warning: compiled radial kernel skipped "
            f"({type(exc).__name__}: {exc}); the pure-Python fallback "
            "will be used"
        )


try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "kelvinasym._radial_rk4",
                ["src/kelvinasym/_radial_rk4.pyx"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
