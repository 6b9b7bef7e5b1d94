"""Build script: compiles the optional Cython kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing Cython or C compiler only costs speed. OpenMP is
probed at build time; without it the banded splat loop degrades to serial
with identical output.
"""

import os
import subprocess
import sys
import tempfile

from setuptools import setup


def _has_openmp() -> bool:
    if os.environ.get("EMBEDVIEW_NO_OPENMP"):
        return False
    cc = os.environ.get("CC", "cc")
    src = "#include <omp.h>\nint main(void){return omp_get_max_threads()>0?0:1;}\n"
    with tempfile.TemporaryDirectory() as tmp:
        c_path = os.path.join(tmp, "omp.c")
        with open(c_path, "w") as f:
            f.write(src)
        try:
            return (
                subprocess.run(
                    [cc, "-fopenmp", c_path, "-o", os.path.join(tmp, "omp")],
                    capture_output=True,
                ).returncode
                == 0
            )
        except OSError:
            return False


ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    compile_args = ["-O3"]
    link_args = []
    if _has_openmp():
        compile_args.append("-fopenmp")
        link_args.append("-fopenmp")
    else:
        print("embedview: building kernels without OpenMP", file=sys.stderr)

    ext_modules = cythonize(
        [
            Extension(
                "embedview._kernels._native",
                ["src/embedview/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=compile_args,
                extra_link_args=link_args,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
