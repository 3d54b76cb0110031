import os

from setuptools import Extension, setup

# The compiled kernels are an optional fast path: the package falls back to
# the pure numpy/Python implementations when the extension is absent.
# Set SEAFARER_NO_EXT=1 to skip building it.
ext_modules = []
if os.environ.get("SEAFARER_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "seafarer.kernels._compiled",
                    ["src/seafarer/kernels/_compiled.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
