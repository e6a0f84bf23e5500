# -*- coding: utf-8 -*-
#
# plv documentation build configuration file.

import sys, os

# the package is imported from the repository root by autodoc
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.napoleon']
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'plv'
copyright = u'2021, the plv developers'

version = 'v0.1.0'
release = 'v0.1.0'

exclude_patterns = ['_build']
pygments_style = 'sphinx'

autodoc_member_order = 'bysource'
autodoc_mock_imports = ['statsmodels']

# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'
html_static_path = []
htmlhelp_basename = 'plvdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'plv.tex', u'plv Documentation', u'the plv developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'plv', u'plv Documentation', [u'the plv developers'], 1)
]
