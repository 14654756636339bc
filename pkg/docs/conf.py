#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# acrpy documentation build configuration file.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon'
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'acrpy'
copyright = '2024, acrpy developers'
author = 'acrpy developers'
version = '0.1'
release = '0.1a'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'acrpydoc'

latex_documents = [
    (master_doc, 'acrpy.tex', 'acrpy Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'acrpy', 'acrpy Documentation', [author], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy', None)}
