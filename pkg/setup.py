"""Build the optional compiled marking kernel; the package works without it."""
import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """A failed compile leaves the pure-Python kernel in charge."""

    def run(self):
        try:
            super().run()
        except Exception as e:
            print(f"warning: compiled kernel disabled ({e})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as e:
            print(f"warning: compiled kernel disabled ({e})")


def extensions():
    if os.environ.get("PRSBUCHI_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension("prsbuchi.petri._kernel", ["src/prsbuchi/petri/_kernel.pyx"])
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
