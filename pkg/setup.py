"""Build script for the optional compiled kernel.

If Cython or a C compiler is unavailable the package installs without the
extension and falls back to the numpy implementation at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("tt_toda._kernels", ["src/tt_toda/_kernels.pyx"], include_dirs=[numpy.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        language_level=3,
        quiet=True,
    )
except Exception:  # pragma: no cover - build environment dependent
    ext_modules = []

setup(ext_modules=ext_modules)
