import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ENGAGEMAX_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fall back to the pure-Python kernels
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("engagemax._ckernels", ["src/engagemax/_ckernels.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
