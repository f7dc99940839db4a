# Sphinx configuration for the catmap documentation.
import os
import sys

# make the catmap package importable for autodoc
sys.path.insert(0, os.path.abspath("../../../"))

project = "catmap"
copyright = "2026, catmap developers"
author = "catmap developers"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]

autodoc_typehints = "description"

napoleon_numpy_docstring = True
napoleon_use_param = True

exclude_patterns = []

html_theme = "classic"
