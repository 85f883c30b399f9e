import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the fallback kernel is used
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("QPCASCADE_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "qpcascade.cascade._ckernel",
                ["src/qpcascade/cascade/_ckernel.pyx"],
                include_dirs=[np.get_include()],
                # bit-identical results with the Python kernel need strict IEEE math
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
