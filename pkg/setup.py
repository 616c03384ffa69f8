"""Build script for the optional compiled kernel.

``pip install -e . --no-build-isolation`` compiles ``musweep.kernels._fast``
when Cython is importable; without it the pure-Python kernels are used.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "musweep.kernels._fast",
                ["src/musweep/kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
