from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    # -ffp-contract=off keeps the compiled kernels bit-compatible with the
    # pure-Python reference implementations (no fused multiply-add).
    ext_modules = cythonize(
        [
            Extension(
                "tensormdp._kernels._native",
                ["src/tensormdp/_kernels/_native.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # Pure-Python install; tensormdp._kernels falls back to the reference
    # implementations at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
