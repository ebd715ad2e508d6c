from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled stepper is optional: if no compiler is available the install
# still succeeds and datrack falls back to the numpy kernel at import time.
ext = Extension(
    "datrack._speedup",
    sources=["src/datrack/_speedup.pyx"],
    extra_compile_args=["-O3"],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level=3))
