"""Build the optional compiled kernels; the package works without them."""
import os
import platform

from setuptools import setup

# hardware popcount; every x86-64 CPU of the last fifteen years has it
_ARCH_FLAGS = ["-mpopcnt"] if platform.machine().lower() in ("x86_64", "amd64") else []

ext_modules = []
if os.environ.get("PQCBOUNDS_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "pqcbounds._kernels",
                    ["src/pqcbounds/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3", *_ARCH_FLAGS],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
