import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ADRC_LAB_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "adrclab.sim._loopstep",
                    ["src/adrclab/sim/_loopstep.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython available: the pure-Python kernel is used at runtime.
        ext_modules = []

setup(ext_modules=ext_modules)
