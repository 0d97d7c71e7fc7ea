#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# pyudtfs documentation build configuration file

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

# Mock the compiled dependencies on RTD
if os.environ.get('READTHEDOCS') == 'True':
    autodoc_mock_imports = ["numpy", "pandas", "networkx", "coloredlogs", "yaml"]

# -- General configuration ---------------------------------------------

needs_sphinx = '1.3'  # Napoleon extension

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.viewcode',
              'sphinx.ext.napoleon',
              'sphinx.ext.mathjax',
              ]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'pyudtfs'
copyright = "2026, Dih5"
author = "Dih5"

version = release = '0.1.0'

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output -------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'pyudtfsdoc'

# -- Options for LaTeX, manual page and Texinfo output -----------------

latex_documents = [
    (master_doc, 'pyudtfs.tex', 'pyudtfs Package Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'pyudtfs', 'pyudtfs Package Documentation', [author], 1)
]

texinfo_documents = [
    (master_doc, 'pyudtfs', 'pyudtfs Package Documentation', author, 'pyudtfs',
     'Definability of types over finite sets in finite posets.', 'Miscellaneous'),
]
