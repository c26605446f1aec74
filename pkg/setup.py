"""Build script: compiles the optional tree-kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the compiled module only speeds up per-tree graph
loops at corpus scale.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hatecast._treekern",
                ["src/hatecast/_treekern.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
