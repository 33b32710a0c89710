# Sphinx configuration for the Django SBP documentation.

from sbp import __version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "Django SBP"
copyright = "2026, the Django SBP authors"
author = "the Django SBP authors"

# The short X.Y version.
version = ".".join(__version__.split(".")[0:2])
# The full version, including alpha/beta/rc tags.
release = __version__

language = "en"
exclude_patterns = ["_build"]
pygments_style = "sphinx"

html_theme = "alabaster"
html_static_path = []
htmlhelp_basename = "DjangoSBPdoc"

latex_documents = [
    (master_doc, "DjangoSBP.tex", "Django SBP Documentation", author, "manual"),
]

man_pages = [(master_doc, "djangosbp", "Django SBP Documentation", [author], 1)]

intersphinx_mapping = {"https://docs.python.org/3": None}
