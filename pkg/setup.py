import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "contactline.kernels._pentacore",
                ["src/contactline/kernels/_pentacore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback backend is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
