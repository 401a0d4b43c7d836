import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PACKFORGE_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "packforge.kernels._ckernels",
                    ["src/packforge/kernels/_ckernels.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # no Cython: install pure-Python only, kernels fall back at import
        ext_modules = []

setup(ext_modules=ext_modules)
