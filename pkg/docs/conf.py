# -*- coding: utf-8 -*-
#
# prunetree documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys, os

# make sure we are documenting the local version with autodoc
sys.path.insert(0, os.path.abspath('..'))
import prunetree

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.intersphinx',
              'sphinx.ext.mathjax']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'prunetree'
copyright = u'2024, the prunetree developers'

# The short X.Y version.
version = ".".join(map(str, prunetree.__version__))
# The full version, including alpha/beta/rc tags.
release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'


# -- Options for HTML output ---------------------------------------------------

html_theme = 'sphinxdoc'
html_static_path = []
htmlhelp_basename = 'prunetreedoc'


# -- Options for manual page output --------------------------------------------

man_pages = [
    ('cli', 'prunetree', u'prunetree command line',
     [u'the prunetree developers'], 1)
]


intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}


def setup(app):
    from sphinx.ext import autodoc

    class MyDataDocumenter(autodoc.DataDocumenter):
        # To fetch the docstrings for the settings, Sphinx needs some help.
        # Without this, it would insert the values as signatures, like:
        # prunetree.settings.PRUNETREE_NODE_CAP = 10000000
        priority = 20

        def add_directive_header(self, sig):
            autodoc.ModuleLevelDocumenter.add_directive_header(self, sig)

    app.add_autodocumenter(MyDataDocumenter)
