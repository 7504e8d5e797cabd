"""
C, C++, Java and JavaScript comment scanners.
All four share `//` and `/* */` comments and differ in their string literals.
"""

import re

from .base import CommentScanner, Grammar, is_identifier_char

RAW_STRING = re.compile(r'R"([^()\\ \t\r\n]{0,16})\(')
RAW_PREFIXES = ('', 'L', 'u', 'U', 'u8')
VALUE_END = frozenset({')', ']', '"', "'", '`'})
REGEX_KEYWORDS = frozenset({'return', 'typeof', 'instanceof', 'in', 'of', 'new', 'delete', 'void', 'throw', 'case',
                            'do', 'else', 'yield', 'await'})


class CScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('//',),
        block_delimiters=(('/*', '*/'),),
        quotes=('"', "'"),
        line_continuation=True,
    )

    def scan_string(self) -> bool:
        if self.content.startswith("'", self.pos) and self.is_digit_separator():
            self.pos += 1
            return True
        return super().scan_string()

    def is_digit_separator(self) -> bool:
        """1'000'000 and 0xFF'FF use digit separators; u8'a' is a character literal"""
        if self.pos + 1 >= self.length or not self.content[self.pos + 1].isalnum():
            return False
        start = self.pos
        while start > 0 and (self.content[start - 1].isalnum() or self.content[start - 1] in "_'"):
            start -= 1
        return start < self.pos and self.content[start].isdigit()


class CppScanner(CScanner):
    extra_triggers = (r'R"',)

    def step(self) -> bool:
        return self.scan_raw_string() or super().step()

    def scan_raw_string(self) -> bool:
        """Skip R"delim( ... )delim" without interpreting escapes or newlines"""
        match = RAW_STRING.match(self.content, self.pos)
        if match is None:
            return False
        prefix_start = self.pos
        while prefix_start > 0 and (self.content[prefix_start - 1].isalnum() or self.content[prefix_start - 1] == '_'):
            prefix_start -= 1
        if self.content[prefix_start:self.pos] not in RAW_PREFIXES:
            return False

        closing = ')' + match.group(1) + '"'
        end = self.content.find(closing, match.end())
        self.pos = self.length if end == -1 else end + len(closing)
        return True


class JavaScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('//',),
        block_delimiters=(('/*', '*/'),),
        quotes=('"""', '"', "'"),  # text blocks
        multiline_quotes=frozenset({'"""'}),
    )


class JavaScriptScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('//',),
        block_delimiters=(('/*', '*/'),),
        quotes=('"', "'", '`'),  # template literals span lines
        multiline_quotes=frozenset({'`'}),
    )
    extra_triggers = (r'/',)

    def step(self) -> bool:
        return self.scan_block() or self.scan_line() or self.scan_regex() or self.scan_string()

    def scan_regex(self) -> bool:
        """A slash where no value can end starts a regex literal, otherwise it divides"""
        if not self.content.startswith('/', self.pos):
            return False
        token, _ = self.previous_token(self.pos)
        if token in VALUE_END or (token and is_identifier_char(token[0]) and token not in REGEX_KEYWORDS):
            return False
        end = self.regex_end(self.pos + 1)
        if end == -1:
            return False
        while end < self.length and self.content[end].isalpha():
            end += 1
        self.pos = end
        return True
