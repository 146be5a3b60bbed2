"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension: ``tvbo.backends``
falls back to the NumPy reference implementation when the compiled module
is missing, so the extension is marked optional and a failed compile does
not abort the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    native = Extension(
        "tvbo.backends._native",
        sources=["src/tvbo/backends/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    native.optional = True
    ext_modules = cythonize([native], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
