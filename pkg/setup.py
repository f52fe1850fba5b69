from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:     # the pure-Python kernels are used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ugrowth.finitegrp._ckernels", ["src/ugrowth/finitegrp/_ckernels.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
