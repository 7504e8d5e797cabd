import re
from typing import List, NamedTuple

PUNCTUATION = frozenset('.,;:()[]"\'`')
_WORD = re.compile(r'\S+')


class Token(NamedTuple):
    text: str
    start: int
    end: int


def tokenize(text: str) -> List[Token]:
    """Split on whitespace, then peel leading and trailing punctuation into single-character tokens"""
    tokens = []
    for match in _WORD.finditer(text):
        start, end = match.span()
        leading = []
        while start < end and text[start] in PUNCTUATION:
            leading.append(Token(text[start], start, start + 1))
            start += 1
        trailing = []
        while end > start and text[end - 1] in PUNCTUATION:
            trailing.append(Token(text[end - 1], end - 1, end))
            end -= 1

        tokens.extend(leading)
        if start < end:
            tokens.append(Token(text[start:end], start, end))
        tokens.extend(reversed(trailing))
    return tokens


def is_punctuation(token: Token) -> bool:
    return token.text in PUNCTUATION
