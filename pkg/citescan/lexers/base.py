"""
Shared comment scanner.
Walks source text with a small state machine: block comments, line comments
and string literals, so that comment markers inside strings are never reported.
"""

import logging
import re
from bisect import bisect_right
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from ..models import Comment, Language, SourceFile

logger = logging.getLogger(__name__)


def is_identifier_char(ch: str) -> bool:
    return ch.isalnum() or ch in '_$'


@dataclass(frozen=True)
class Grammar:
    """Comment and string syntax of one language"""
    line_markers: Tuple[str, ...] = ()
    block_delimiters: Tuple[Tuple[str, str], ...] = ()
    quotes: Tuple[str, ...] = ('"', "'")  # longest first
    multiline_quotes: FrozenSet[str] = frozenset()
    escape: str = '\\'
    line_continuation: bool = False  # backslash-newline extends a line comment


class CommentScanner:
    grammar: Grammar = Grammar()
    extra_triggers: Tuple[str, ...] = ()

    def __init__(self, content: str, language: Language, file: Optional[SourceFile] = None):
        self.content = content
        self.length = len(content)
        self.language = language
        self.file = file
        self.pos = 0
        self.comments: List[Comment] = []
        self.line_starts = [0] + [m.end() for m in re.finditer('\n', content)]

        openers = [opening for opening, _ in self.grammar.block_delimiters]
        openers += list(self.grammar.line_markers) + list(self.grammar.quotes)
        self.triggers = re.compile('|'.join([re.escape(o) for o in openers] + list(self.extra_triggers)))

    def scan(self) -> List[Comment]:
        while self.pos < self.length:
            match = self.triggers.search(self.content, self.pos)
            if match is None:
                break
            self.pos = match.start()
            if not self.step():
                self.pos += 1
        return self.comments

    def step(self) -> bool:
        """Consume one construct at self.pos; False when nothing starts here"""
        return self.scan_block() or self.scan_line() or self.scan_string()

    # Constructs
    def scan_block(self) -> bool:
        for opening, closing in self.grammar.block_delimiters:
            if self.content.startswith(opening, self.pos):
                body_start = self.pos + len(opening)
                end = self.content.find(closing, body_start)
                if end == -1:
                    logger.warning(f"Unterminated block comment at line {self.line_of(self.pos)}; "
                                   f"extending it to end of file")
                    self.emit(body_start, self.length, 'block')
                    self.pos = self.length
                else:
                    self.emit(body_start, end, 'block')
                    self.pos = end + len(closing)
                return True
        return False

    def scan_line(self) -> bool:
        for marker in self.grammar.line_markers:
            if self.content.startswith(marker, self.pos):
                body_start = self.pos + len(marker)
                body_end = self.line_comment_end(body_start)
                self.emit(body_start, body_end, 'line')
                self.pos = body_end
                return True
        return False

    def scan_string(self) -> bool:
        for quote in self.grammar.quotes:
            if self.content.startswith(quote, self.pos):
                self.pos = self.string_end(self.pos + len(quote), quote)
                return True
        return False

    # Helpers
    def line_comment_end(self, start: int) -> int:
        end = self.content.find('\n', start)
        if end == -1:
            end = self.length
        if self.grammar.line_continuation:
            while end < self.length and self.content[start:end].rstrip('\r').endswith('\\'):
                following = self.content.find('\n', end + 1)
                end = self.length if following == -1 else following
        if end > start and self.content[end - 1] == '\r':
            end -= 1
        return end

    def string_end(self, i: int, quote: str) -> int:
        """Offset just past the closing quote; unterminated single-line strings stop at the newline"""
        multiline = quote in self.grammar.multiline_quotes
        escape = self.grammar.escape
        while i < self.length:
            ch = self.content[i]
            if escape and ch == escape:
                i += 2
                continue
            if self.content.startswith(quote, i):
                return i + len(quote)
            if ch == '\n' and not multiline:
                return i
            i += 1
        return self.length

    def previous_token(self, offset: int) -> Tuple[str, bool]:
        """Nearest word or punctuation character before offset, and whether whitespace separates them"""
        i = offset
        while i > 0 and self.content[i - 1] in ' \t\r\n':
            i -= 1
        spaced = i < offset
        if i == 0:
            return '', spaced
        if not is_identifier_char(self.content[i - 1]):
            return self.content[i - 1], spaced
        start = i
        while start > 0 and is_identifier_char(self.content[start - 1]):
            start -= 1
        return self.content[start:i], spaced

    def regex_end(self, start: int, multiline: bool = False) -> int:
        """Offset just past the closing slash of a regex literal whose body begins at start, or -1"""
        i, in_class = start, False
        while i < self.length:
            ch = self.content[i]
            if ch == '\\':
                i += 2
                continue
            if ch == '\n' and not multiline:
                return -1
            if in_class:
                in_class = ch != ']'
            elif ch == '[':
                in_class = True
            elif ch == '/':
                return i + 1
            i += 1
        return -1

    def at_line_start(self, offset: int) -> bool:
        return offset == 0 or self.content[offset - 1] == '\n'

    def line_of(self, offset: int) -> int:
        return bisect_right(self.line_starts, offset)

    def emit(self, body_start: int, body_end: int, kind: str):
        if body_end <= body_start:
            return
        self.comments.append(Comment(
            language=self.language,
            start_line=self.line_of(body_start),
            end_line=self.line_of(body_end - 1),
            raw_text=self.content[body_start:body_end],
            kind=kind,
            start=body_start,
            end=body_end,
            file=self.file,
        ))
