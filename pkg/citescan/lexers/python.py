"""
Python comment scanner.
Only `#` comments count; docstrings are string literals.
"""

from .base import CommentScanner, Grammar


class PythonScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('#',),
        quotes=('"""', "'''", '"', "'"),
        multiline_quotes=frozenset({'"""', "'''"}),
    )
