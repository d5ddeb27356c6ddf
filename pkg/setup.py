# Builds the optional compiled kernels; the package falls back to
# sicycles._pykernels when the extension is absent.
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SICYCLES_NO_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sicycles._kernels",
                ["src/sicycles/_kernels.pyx"],
                include_dirs=[np.get_include()],
                language="c++",
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
