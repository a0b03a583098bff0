import numpy
from setuptools import setup
from setuptools.extension import Extension

# The compiled kernel module is optional: circgp falls back to the pure
# numpy implementations in circgp._kernels_py when the extension is absent.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "circgp._kernels",
                ["src/circgp/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
