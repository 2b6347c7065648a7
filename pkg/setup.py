"""Build script for the optional compiled distance core.

The package is pure Python plus one optional Cython extension that
accelerates pairwise patch-distance computation.  If Cython or a C
compiler is unavailable the build degrades gracefully and the NumPy
fallback is used at import time.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = [
        Extension(
            "denoisekit._accel._core",
            ["src/denoisekit/_accel/_core.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
            optional=True,
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
