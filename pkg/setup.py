import os

from setuptools import Extension, setup


def build_ext_modules():
    if os.environ.get("APRONID_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        name="apronid._speedups",
        sources=[os.path.join("src", "apronid", "_speedups.pyx")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=build_ext_modules())
