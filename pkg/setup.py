import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PVAUDIT_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "pvaudit._ckernels",
                    ["src/pvaudit/_ckernels.pyx"],
                    # keep float op order identical to the pure-Python kernels
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
