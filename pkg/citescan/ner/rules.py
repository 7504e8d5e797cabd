"""
Deterministic rule and lexicon tagger.
Rules run in a fixed order and each token belongs to at most one span,
so earlier rules win: identifiers, keyword-anchored numbers, years, lexicon
phrases, then authors and titles.
"""

import re
from typing import List, Optional, Sequence

from ..models import EntitySpan, EntityType
from .lexicons import Lexicons, PhraseIndex, default_lexicons
from .tokens import Token, is_punctuation, tokenize

YEAR_RANGE = (1900, 2029)
MAX_TITLE_TOKENS = 30
MAX_QUOTED_TOKENS = 40

URL_SCHEMES = {'http', 'https', 'ftp'}
VOLUME_KEYWORDS = {'vol', 'vols', 'volume'}
NUMBER_KEYWORDS = {'no', 'nr', 'num', 'number', 'issue'}
PAGES_KEYWORDS = {'p', 'pp', 'pg', 'page', 'pages'}
AUTHOR_CONNECTORS = {',', ';', '.', 'and', '&', 'et', 'al'}

_YEAR = re.compile(r'\d{4}')
_NUMBERISH = re.compile(r'\d+[A-Za-z]?')
_PAGE_RANGE = re.compile(r'\d+(?:-{1,2}\d+)?')
_BARE_RANGE = re.compile(r'(\d+)-{1,2}(\d+)')
_RAW_URL = re.compile(r'(?:https?|ftp)://\S+|www\.\S+\.\S+', re.IGNORECASE)
_URL_PIECE = re.compile(r'[A-Za-z0-9._~%?=&+\-]+')
_DOI = re.compile(r'10\.\d{4,9}(?:/\S+)?')
_DOI_SUFFIX = re.compile(r'[A-Za-z0-9._\-()<>;]*\d[A-Za-z0-9._\-()<>;]*')
_ISSN = re.compile(r'\d{4}-\d{3}[\dXx]')
_ISBN_PART = re.compile(r'[\dXx][\dXx-]*')
_SURNAME = re.compile(r"[^\W\d_]+(?:['\-][^\W\d_]+)*")
_INITIAL = re.compile(r'[A-Z](?:-[A-Z])?')


def is_year(word: str) -> bool:
    return bool(_YEAR.fullmatch(word)) and YEAR_RANGE[0] <= int(word) <= YEAR_RANGE[1]


def is_surname(word: str) -> bool:
    return (len(word) > 1 and word[0].isupper() and bool(_SURNAME.fullmatch(word))
            and any(ch.islower() for ch in word))


def is_initial(word: str) -> bool:
    return bool(_INITIAL.fullmatch(word))


class _Claims:
    """Token ownership for one tagging pass"""

    def __init__(self, tokens: Sequence[Token]):
        self.tokens = tokens
        self.owner: List[Optional[EntityType]] = [None] * len(tokens)
        self.spans: List[EntitySpan] = []

    def free(self, i: int, j: int) -> bool:
        return 0 <= i <= j < len(self.tokens) and all(self.owner[k] is None for k in range(i, j + 1))

    def claim(self, etype: EntityType, i: int, j: int) -> bool:
        if not self.free(i, j):
            return False
        for k in range(i, j + 1):
            self.owner[k] = etype
        self.spans.append(EntitySpan(etype=etype, start=self.tokens[i].start,
                                     end=self.tokens[j].end, source='rule'))
        return True

    def word(self, i: int) -> str:
        return self.tokens[i].text if 0 <= i < len(self.tokens) else ''


def rule_tag(text: str, lexicons: Optional[Lexicons] = None) -> List[EntitySpan]:
    """Tag entity spans with patterns and lexicons"""
    lexicons = lexicons or default_lexicons()
    tokens = tokenize(text)
    claims = _Claims(tokens)

    for rule in (_tag_urls, _tag_dois, _tag_isbns, _tag_issns, _tag_keyword_numbers,
                 _tag_page_ranges, _tag_years):
        rule(claims)
    _tag_months(claims, lexicons.months)
    _tag_phrases(claims, lexicons.publishers, EntityType.PUBLISHER)
    _tag_phrases(claims, lexicons.venues, EntityType.BOOKTITLE_OR_JOURNAL)
    _tag_authors(claims)
    _tag_quoted_titles(claims)
    _tag_titles_after_authors(claims)

    return sorted(claims.spans, key=lambda s: s.start)


def _tag_urls(claims: _Claims):
    tokens, n = claims.tokens, len(claims.tokens)
    for i in range(n):
        word = tokens[i].text
        if _RAW_URL.fullmatch(word):
            claims.claim(EntityType.URL, i, i)
            continue
        if word.casefold() in URL_SCHEMES and claims.word(i + 1) == ':':
            j = i + 1
        elif word.casefold().startswith('www.') and '.' in word[4:]:
            j = i
        else:
            continue
        # path segments became separate words when slashes were stripped
        if j == i + 1 and i + 2 < n and _URL_PIECE.fullmatch(tokens[i + 2].text):
            j = i + 2
        while j + 1 < n and _URL_PIECE.fullmatch(tokens[j + 1].text) and _looks_like_url_part(tokens[j + 1].text):
            j += 1
        claims.claim(EntityType.URL, i, j)


def _looks_like_url_part(word: str) -> bool:
    return any(ch in word for ch in '._~%?=&-') or (word.isalnum() and any(ch.isdigit() for ch in word))


def _tag_dois(claims: _Claims):
    tokens, n = claims.tokens, len(claims.tokens)
    for i in range(n):
        if not _DOI.fullmatch(tokens[i].text):
            continue
        j = i
        if '/' not in tokens[i].text and i + 1 < n and _DOI_SUFFIX.fullmatch(tokens[i + 1].text):
            j = i + 1
        claims.claim(EntityType.DOI, i, j)


def _after_label(claims: _Claims, i: int) -> int:
    """First token index after a keyword and its optional ':' or '.'"""
    k = i + 1
    if claims.word(k) in (':', '.'):
        k += 1
    return k


def _tag_isbns(claims: _Claims):
    tokens, n = claims.tokens, len(claims.tokens)
    for i in range(n):
        if tokens[i].text.casefold() not in ('isbn', 'isbn-10', 'isbn-13'):
            continue
        k = _after_label(claims, i)
        first, digits = k, 0
        while k < n and _ISBN_PART.fullmatch(tokens[k].text) and digits < 13:
            digits += sum(ch.isdigit() or ch in 'Xx' for ch in tokens[k].text)
            k += 1
        if k > first and digits in (10, 13):
            claims.claim(EntityType.ISBN, first, k - 1)


def _tag_issns(claims: _Claims):
    tokens = claims.tokens
    for i in range(len(tokens)):
        if tokens[i].text.casefold() != 'issn':
            continue
        k = _after_label(claims, i)
        if _ISSN.fullmatch(claims.word(k)):
            claims.claim(EntityType.ISSN, k, k)


def _tag_keyword_numbers(claims: _Claims):
    """Vol. 30, No. 7, pp. 740-755; the keyword is part of the span"""
    tokens = claims.tokens
    for i in range(len(tokens)):
        keyword = tokens[i].text.casefold()
        k = i + 1 if claims.word(i + 1) != '.' else i + 2
        value = claims.word(k)
        if tokens[i].text == 'P':
            continue  # an initial, as in "Coppens, P."
        if keyword in PAGES_KEYWORDS and _PAGE_RANGE.fullmatch(value):
            claims.claim(EntityType.PAGES, i, k)
        elif keyword in VOLUME_KEYWORDS and _NUMBERISH.fullmatch(value):
            claims.claim(EntityType.VOLUME, i, k)
        elif keyword in NUMBER_KEYWORDS and _NUMBERISH.fullmatch(value):
            claims.claim(EntityType.NUMBER, i, k)


def _tag_page_ranges(claims: _Claims):
    for i, token in enumerate(claims.tokens):
        match = _BARE_RANGE.fullmatch(token.text)
        if not match:
            continue
        first, last = match.groups()
        if int(first) < int(last) and not (is_year(first) and is_year(last)):
            claims.claim(EntityType.PAGES, i, i)


def _tag_years(claims: _Claims):
    for i, token in enumerate(claims.tokens):
        if is_year(token.text):
            claims.claim(EntityType.YEAR, i, i)


def _tag_months(claims: _Claims, months: PhraseIndex):
    tokens = claims.tokens
    for i in range(len(tokens)):
        last = months.match_at(tokens, i)
        if last is None:
            continue
        before = i - 1 if claims.word(i - 1) != ',' else i - 2
        after = last + 1
        while claims.word(after) in ('.', ','):
            after += 1
        if claims.word(before).isdigit() or claims.word(after).isdigit():
            claims.claim(EntityType.MONTH, i, last)


def _tag_phrases(claims: _Claims, index: PhraseIndex, etype: EntityType):
    tokens = claims.tokens
    i = 0
    while i < len(tokens):
        last = index.match_at(tokens, i) if claims.owner[i] is None else None
        if last is not None and claims.claim(etype, i, last):
            i = last + 1
        else:
            i += 1


def _tag_authors(claims: _Claims):
    """Surname, I. J. and I. J. Surname"""
    tokens, n = claims.tokens, len(claims.tokens)
    i = 0
    while i < n:
        if claims.owner[i] is not None:
            i += 1
            continue

        if is_surname(tokens[i].text) and claims.word(i + 1) == ',':
            k, last = i + 2, None
            while k + 1 < n and is_initial(tokens[k].text) and tokens[k + 1].text == '.':
                last = k + 1
                k += 2
            if last is not None and claims.claim(EntityType.AUTHOR, i, last):
                i = last + 1
                continue

        k = i
        while k + 1 < n and is_initial(tokens[k].text) and tokens[k + 1].text == '.':
            k += 2
        if k > i and k < n and is_surname(tokens[k].text) and claims.claim(EntityType.AUTHOR, i, k):
            i = k + 1
            continue
        i += 1


def _strip_punctuation(claims: _Claims, i: int, j: int):
    while i <= j and is_punctuation(claims.tokens[i]):
        i += 1
    while j >= i and is_punctuation(claims.tokens[j]):
        j -= 1
    return i, j


def _tag_quoted_titles(claims: _Claims):
    tokens, n = claims.tokens, len(claims.tokens)
    i = 0
    while i < n:
        if tokens[i].text != '"' or claims.owner[i] is not None:
            i += 1
            continue
        close = next((k for k in range(i + 1, min(n, i + MAX_QUOTED_TOKENS + 2)) if tokens[k].text == '"'), None)
        if close is None:
            i += 1
            continue
        first, last = _strip_punctuation(claims, i + 1, close - 1)
        if first <= last:
            claims.claim(EntityType.TITLE, first, last)
        i = close + 1


def _tag_titles_after_authors(claims: _Claims):
    """The run of untagged words between an author group and the next tagged entity"""
    tokens, owner, n = claims.tokens, claims.owner, len(claims.tokens)
    i = 0
    while i < n:
        if owner[i] != EntityType.AUTHOR:
            i += 1
            continue
        # end of the author group
        j = i
        while j + 1 < n and (owner[j + 1] == EntityType.AUTHOR
                             or (owner[j + 1] is None and tokens[j + 1].text.casefold() in AUTHOR_CONNECTORS)):
            j += 1
        start = j + 1
        while start < n and (owner[start] == EntityType.YEAR or (owner[start] is None and is_punctuation(tokens[start]))):
            start += 1

        k = start
        while (k < n and k - start < MAX_TITLE_TOKENS and owner[k] is None
               and tokens[k].text not in ('.', ',', ';') and tokens[k].text != 'In'):
            k += 1
        first, last = _strip_punctuation(claims, start, k - 1)

        following = k
        while following < n and owner[following] is None and (
                is_punctuation(tokens[following]) or tokens[following].text.casefold() == 'in'):
            following += 1
        terminated = following < n and owner[following] is not None
        if first <= last and terminated and (tokens[first].text[0].isupper() or tokens[first].text[0].isdigit()):
            claims.claim(EntityType.TITLE, first, last)
        i = max(k, j + 1)
