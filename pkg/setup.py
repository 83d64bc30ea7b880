# Builds the optional compiled kernel.  When Cython (or a C compiler) is
# unavailable the package still works through the pure-numpy fallback in
# saddlekit._kernels_py; the extension is a speedup, not a requirement.
#
#   python setup.py build_ext --inplace

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "saddlekit._kernels",
                ["src/saddlekit/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    import warnings

    warnings.warn("Cython not available; building without the compiled kernel")

setup(ext_modules=ext_modules)
