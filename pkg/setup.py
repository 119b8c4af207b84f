import os

import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernel draws from numpy's Philox bit generator through the
# C distributions API, so it links the static npyrandom library shipped
# inside the numpy wheel.
npyrandom_dir = os.path.join(os.path.dirname(np.random.__file__), "lib")

ext_modules = cythonize(
    [
        Extension(
            "interface_lab._kernels",
            ["src/interface_lab/_kernels.pyx"],
            include_dirs=[np.get_include()],
            library_dirs=[npyrandom_dir],
            libraries=["npyrandom"],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=ext_modules)
