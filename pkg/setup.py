"""Builds the optional compiled DTW kernel.

The package works without it: cmssa.dtw falls back to the pure-Python
kernel when the extension is missing or fails to build.
"""

from setuptools import Extension, setup

ext = Extension(
    "cmssa._dtw_cy",
    sources=["src/cmssa/_dtw_cy.pyx"],
    optional=True,
)

try:
    from Cython.Build import cythonize

    extensions = cythonize([ext], language_level=3)
except ImportError:
    extensions = []

setup(ext_modules=extensions)
