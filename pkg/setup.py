from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "nestcast.kernel._speedups",
                ["src/nestcast/kernel/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package still installs; the pure-Python kernel
    # backend is selected at import time.
    extensions = []

setup(ext_modules=extensions)
