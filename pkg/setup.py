"""Build script: compiles the optional C extension for the hot kernels.

The package works without the extension (a pure-Python/NumPy fallback is
selected at import time), so any failure here downgrades to a plain build
instead of aborting the install.
"""

from setuptools import setup


def extension_modules():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    try:
        return cythonize(
            [
                Extension(
                    "rankci._kernels",
                    ["src/rankci/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except Exception:
        return []


setup(ext_modules=extension_modules())
