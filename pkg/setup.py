from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "clarion._bm25_kernel",
        ["src/clarion/_bm25_kernel.pyx"],
        # -ffp-contract=off keeps the compiler from fusing multiply-adds so the
        # compiled kernel stays bit-identical to the pure-Python fallback.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    if cythonize is not None
    else [],
)
