import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    have_cython = True
except ModuleNotFoundError:
    have_cython = False

if have_cython:
    extensions = cythonize(
        [
            Extension(
                "coinwalk._kernels_cy",
                ["src/coinwalk/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # Pure-Python kernels are selected at import when the extension is absent.
    extensions = []

setup(ext_modules=extensions)
