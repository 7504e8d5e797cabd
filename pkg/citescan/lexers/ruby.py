"""
Ruby comment scanner: `#` line comments and =begin/=end blocks at column 0.
Heredoc bodies, percent literals and regex literals are skipped like strings.
"""

import logging
import re
from typing import List, Tuple

from .base import CommentScanner, Grammar, is_identifier_char

logger = logging.getLogger(__name__)

HEREDOC = re.compile(r'<<([~-]?)(["\'`]?)([A-Za-z_][A-Za-z0-9_]*)\2')
BARE_IDENTIFIER = re.compile(r'[A-Z_][A-Z0-9_]*$')
BLOCK_BEGIN = '=begin'
BLOCK_END = re.compile(r'^=end(?=\s|$)', re.MULTILINE)
PERCENT_LITERAL = re.compile(r'%([qQwWiIrsx]?)([^\w\s])')
PAIRS = {'(': ')', '[': ']', '{': '}', '<': '>'}
VALUE_END = frozenset({')', ']', '}', '"', "'", '`'})
KEYWORDS = frozenset({'if', 'unless', 'while', 'until', 'when', 'and', 'or', 'not', 'return', 'then', 'elsif', 'case',
                      'in', 'do'})


class RubyScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('#',),
        quotes=('"', "'", '`'),
        multiline_quotes=frozenset({'"', "'", '`'}),
    )
    extra_triggers = (r'(?<![^\n])=begin', r'<<', r'\n', r'%', r'/')

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.pending: List[Tuple[str, bool]] = []

    def step(self) -> bool:
        return (self.scan_begin_block() or self.open_heredoc() or self.skip_heredoc_bodies()
                or self.scan_percent_literal() or self.scan_regex() or super().step())

    def starts_literal(self, offset: int, following: str) -> bool:
        """Whether a `%` or `/` at offset opens a literal rather than a binary operator"""
        token, spaced = self.previous_token(offset)
        if not token:
            return True
        if token[0].isdigit():
            return False
        if is_identifier_char(token[0]):
            # `puts %w[a b]` passes a literal, `x % y` divides
            return token in KEYWORDS or (spaced and not following.isspace())
        return token not in VALUE_END

    def scan_percent_literal(self) -> bool:
        match = PERCENT_LITERAL.match(self.content, self.pos)
        if match is None or not self.starts_literal(self.pos, match.group(2)):
            return False
        kind, opening = match.groups()
        if opening == '=' and not kind:
            return False
        closing = PAIRS.get(opening, opening)
        i, depth = match.end(), 1
        while i < self.length:
            ch = self.content[i]
            if ch == '\\':
                i += 2
                continue
            if ch == closing:
                depth -= 1
                if depth == 0:
                    break
            elif ch == opening:
                depth += 1
            i += 1
        self.pos = min(i + 1, self.length)
        return True

    def scan_regex(self) -> bool:
        if not self.content.startswith('/', self.pos):
            return False
        following = self.content[self.pos + 1:self.pos + 2]
        if not following or not self.starts_literal(self.pos, following):
            return False
        end = self.regex_end(self.pos + 1, multiline=True)
        if end == -1:
            return False
        while end < self.length and self.content[end].isalpha():
            end += 1
        self.pos = end
        return True

    def scan_begin_block(self) -> bool:
        if not (self.at_line_start(self.pos) and self.content.startswith(BLOCK_BEGIN, self.pos)):
            return False
        body_start = self.pos + len(BLOCK_BEGIN)
        if body_start < self.length and not self.content[body_start].isspace():
            return False

        closing = BLOCK_END.search(self.content, body_start)
        if closing is None:
            logger.warning(f"Unterminated =begin block at line {self.line_of(self.pos)}; "
                           f"extending it to end of file")
            self.emit(body_start, self.length, 'block')
            self.pos = self.length
            return True

        body_end = closing.start()
        if body_end > body_start and self.content[body_end - 1] == '\n':
            body_end -= 1
        if body_end > body_start and self.content[body_end - 1] == '\r':
            body_end -= 1
        self.emit(body_start, body_end, 'block')
        line_end = self.content.find('\n', closing.end())
        self.pos = self.length if line_end == -1 else line_end
        return True

    def open_heredoc(self) -> bool:
        match = HEREDOC.match(self.content, self.pos)
        if match is None:
            return False
        flag, quote, identifier = match.groups()
        if not flag and not quote and not BARE_IDENTIFIER.match(identifier):
            return False  # a << b is a shift or append
        self.pending.append((identifier, bool(flag)))
        self.pos = match.end()
        return True

    def skip_heredoc_bodies(self) -> bool:
        """At the newline ending a heredoc opener line, skip every pending body"""
        if not (self.pending and self.content.startswith('\n', self.pos)):
            return False
        i = self.pos + 1
        for identifier, indented in self.pending:
            while i < self.length:
                line_end = self.content.find('\n', i)
                line_end = self.length if line_end == -1 else line_end
                line = self.content[i:line_end]
                done = (line.strip() if indented else line.rstrip('\r')) == identifier
                i = line_end + 1
                if done:
                    break
        self.pending = []
        self.pos = min(i - 1, self.length)
        return True
