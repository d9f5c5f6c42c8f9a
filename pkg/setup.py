from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np


ext_module = Extension(
    "mvss._kernels",
    ["src/mvss/_kernels.pyx"],
    include_dirs=[np.get_include()],
)


setup(
    ext_modules=cythonize(ext_module, language_level="3"),
    zip_safe=False,
)
