import sys

from setuptools import setup

# The compiled kernel is an optimization: photonstat falls back to a pure-Python
# implementation at import time if the extension is unavailable, so a failed
# cythonize/compile should not make the package uninstallable.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/photonstat/_kernels.pyx"],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"photonstat: skipping compiled kernels ({exc}); "
          "the pure-Python fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
