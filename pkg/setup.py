"""Builds the optional compiled kernels.

The package works without the extension: maskseq._kernels falls back to the
pure numpy implementations when the compiled module is absent.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "maskseq._kernels.fast",
                sources=["src/maskseq/_kernels/fast.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError as exc:
    warnings.warn(f"building without compiled kernels ({exc})")


class _OptionalBuildExt:
    """Wraps build_ext so a missing compiler degrades to the pure fallback."""

    def __new__(cls):
        from setuptools.command.build_ext import build_ext

        class optional_build_ext(build_ext):
            def run(self):
                try:
                    super().run()
                except Exception as exc:
                    warnings.warn(f"compiled kernels skipped: {exc}")

            def build_extension(self, ext):
                try:
                    super().build_extension(ext)
                except Exception as exc:
                    warnings.warn(f"compiled kernel {ext.name} skipped: {exc}")

        return optional_build_ext


setup(ext_modules=ext_modules, cmdclass={"build_ext": _OptionalBuildExt()})
