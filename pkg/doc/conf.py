# -*- coding: utf-8 -*-
#
# bohmergo documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os
import os.path
import re
import sphinx_rtd_theme

# The package is pure Python, so autodoc imports it from the checkout
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.todo',
    'sphinx.ext.mathjax',
    'sphinx.ext.ifconfig',
    'sphinx.ext.napoleon'
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'bohmergo'
copyright = u'2019, The bohmergo authors'


def get_version():
    globals_ = {}
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    with open(os.path.join(root, 'bohmergo', '_version.py')) as f:
        code = f.read()
    exec(code, globals_)
    release = globals_['__version__']
    match = re.match(r'^(\d+)\.(\d+)', release)
    return match.group(0), release


version, release = get_version()

exclude_patterns = ['_build']
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'
napoleon_google_docstring = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = ['_static']
htmlhelp_basename = 'bohmergodoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
    ('index', 'bohmergo.tex', u'bohmergo Documentation',
     u'The bohmergo authors', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'bohmergo', u'bohmergo Documentation',
     [u'The bohmergo authors'], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    ('index', 'bohmergo', u'bohmergo Documentation',
     u'The bohmergo authors', 'bohmergo',
     'Two-particle Bohmian double-slit trajectories and ergodicity checks.',
     'Miscellaneous'),
]
