"""Build the optional compiled kernels; installation proceeds without them on failure."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext

BASE_FLAGS = ["-O3"]


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback", file=sys.stderr)

    def build_extension(self, ext):
        # plain complex arithmetic; without this gcc routes every product through __muldc3
        fast = ["-fcx-limited-range"] if self.compiler.compiler_type == "unix" else []
        for extra in (fast, []):
            ext.extra_compile_args = BASE_FLAGS + extra
            try:
                super().build_extension(ext)
                return
            except Exception as exc:
                err = exc
        print(f"warning: failed to build {ext.name} ({err}); using numpy fallback", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "juliathermo._ckernels",
        ["src/juliathermo/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=BASE_FLAGS,
    )
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
