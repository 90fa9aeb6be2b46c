import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install still works, kernels fall back
    cythonize = None

extensions = [
    Extension(
        "actstream._kernels._speedups",
        ["src/actstream/_kernels/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps float results bit-identical to the
        # pure-Python fallback (no FMA contraction).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
