"""Build script: compiles the optional occupancy-kernel extension.

The extension is a pure speedup. If Cython or a C compiler is missing the
build degrades to the numpy fallback selected at import time, so failures
here are downgraded to warnings instead of aborting the install.
"""

import platform
import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


class OptionalBuildExt(build_ext):
    """build_ext that tolerates a missing or broken C toolchain."""

    def run(self):
        try:
            super().run()
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as exc:
            warnings.warn(f"skipping compiled kernels, using numpy fallback: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as exc:
            warnings.warn(f"skipping compiled kernels, using numpy fallback: {exc}")


def compile_args():
    args = ["-O3"]
    # The x86-64 baseline predates the POPCNT instruction; every CPU since
    # ~2008 has it and the bitset popcounts are 4x faster with it.
    if platform.machine().lower() in ("x86_64", "amd64"):
        args.append("-mpopcnt")
    return args


def extensions():
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        warnings.warn("Cython not available, building without compiled kernels")
        return []
    return cythonize(
        [
            Extension(
                "skullmatch.kernels._native",
                ["src/skullmatch/kernels/_native.pyx"],
                extra_compile_args=compile_args(),
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
