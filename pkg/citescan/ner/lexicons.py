"""
Lexicon files: venues, months, publishers (required) and places (optional).
One entry per line, UTF-8; matching is case-insensitive and ignores periods.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from ..errors import LexiconMissing
from .tokens import Token, tokenize

logger = logging.getLogger(__name__)

DEFAULT_LEXICON_DIR = Path(__file__).resolve().parent.parent / 'data' / 'lexicons'
REQUIRED = ('venues', 'months', 'publishers')
OPTIONAL = ('places',)
STOPWORDS = frozenset({'of', 'the', 'on', 'and', 'in', 'for', 'de', 'a', '&'})


def phrase_words(text: str) -> Tuple[str, ...]:
    return tuple(tok.text.casefold() for tok in tokenize(text) if tok.text != '.')


@dataclass
class PhraseIndex:
    """Longest-match lookup of multi-word phrases over a token sequence"""
    phrases: Dict[str, List[Tuple[str, ...]]] = field(default_factory=dict)
    words: FrozenSet[str] = frozenset()

    @classmethod
    def build(cls, entries: Sequence[str]) -> 'PhraseIndex':
        phrases: Dict[str, List[Tuple[str, ...]]] = {}
        words = set()
        for entry in entries:
            key = phrase_words(entry)
            if not key:
                continue
            phrases.setdefault(key[0], []).append(key)
            words.update(w for w in key if w not in STOPWORDS)
        for first in phrases:
            phrases[first] = sorted(set(phrases[first]), key=lambda p: (-len(p), p))
        return cls(phrases=phrases, words=frozenset(words))

    def match_at(self, tokens: Sequence[Token], i: int) -> Optional[int]:
        """Index of the last token of the longest phrase starting at token i"""
        first = tokens[i].text.casefold()
        for phrase in self.phrases.get(first, ()):
            j, last, matched = i, i, 0
            while j < len(tokens) and matched < len(phrase):
                word = tokens[j].text.casefold()
                if word == '.' and matched:
                    j += 1
                    continue
                if word != phrase[matched]:
                    break
                last, matched, j = j, matched + 1, j + 1
            if matched == len(phrase):
                return last
        return None

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.words


@dataclass
class Lexicons:
    venues: PhraseIndex
    months: PhraseIndex
    publishers: PhraseIndex
    places: PhraseIndex


def read_entries(path: Path) -> List[str]:
    with open(path, 'r', encoding='utf-8') as f:
        return [line.strip() for line in f if line.strip() and not line.startswith('#')]


def load_lexicons(directory: Optional[Path] = None) -> Lexicons:
    """Load all lexicon files from a directory"""
    directory = Path(directory) if directory else DEFAULT_LEXICON_DIR
    indexes = {}
    for name in REQUIRED + OPTIONAL:
        path = directory / f'{name}.txt'
        if not path.exists():
            if name in REQUIRED:
                raise LexiconMissing(f"required lexicon file not found: {path}")
            logger.warning(f"Optional lexicon {path} not found; continuing without it")
            indexes[name] = PhraseIndex()
            continue
        entries = read_entries(path)
        indexes[name] = PhraseIndex.build(entries)
        logger.debug(f"Loaded {len(entries)} {name} entries from {path}")
    return Lexicons(**indexes)


@lru_cache(maxsize=1)
def default_lexicons() -> Lexicons:
    return load_lexicons(DEFAULT_LEXICON_DIR)
