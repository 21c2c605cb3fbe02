import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels are optional: without Cython the package falls back
# to the pure NumPy implementation selected at import time.
ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "minibatch_accel._kernels",
                ["src/minibatch_accel/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
