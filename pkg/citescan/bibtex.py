"""
BibTeX export of citation records.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Set

from bibtexparser.bibdatabase import BibDatabase
from bibtexparser.bwriter import BibTexWriter

from .models import CitationRecord

logger = logging.getLogger(__name__)

# BibTeX field -> record attribute
FIELD_ORDER = [
    ('author', 'authors'),
    ('title', 'title'),
    ('journal', 'venue'),
    ('year', 'year'),
    ('volume', 'volume'),
    ('number', 'number'),
    ('pages', 'pages'),
    ('month', 'month'),
    ('publisher', 'publisher'),
    ('address', 'address'),
    ('doi', 'doi'),
    ('isbn', 'isbn'),
    ('issn', 'issn'),
    ('url', 'url'),
]

_KEYWORD_PREFIX = re.compile(r'^(?:volume|vol|number|num|nr|no|issue|pages|page|pp|pg|p)\b\s*\.?\s*', re.IGNORECASE)
_NON_ALNUM = re.compile(r'[^0-9a-z]+')


def _clean_number(value: str) -> str:
    """'Vol. 30' -> '30'; keywords stay in the span but not in the entry"""
    return _KEYWORD_PREFIX.sub('', value).strip() or value


def _surname(author: str) -> str:
    if ',' in author:
        return author.split(',', 1)[0]
    words = author.split()
    return words[-1] if words else ''


def base_key(record: CitationRecord) -> str:
    """First author surname + year + first title word, lowercased"""
    surname = _surname(record.authors[0]) if record.authors else ''
    year = ''.join(ch for ch in (record.year or '') if ch.isdigit())
    title_words = (record.title or '').split()
    first_word = title_words[0] if title_words else ''
    key = _NON_ALNUM.sub('', f'{surname}{year}{first_word}'.lower())
    return key or 'anon'


def unique_key(base: str, keys: Set[str]) -> str:
    key, suffix = base, 2
    while key in keys:
        key = f'{base}-{suffix}'
        suffix += 1
    keys.add(key)
    return key


def record_to_entry(record: CitationRecord, keys: Set[str]) -> Dict[str, str]:
    entry = {'ENTRYTYPE': 'misc', 'ID': unique_key(base_key(record), keys)}
    for field, attribute in FIELD_ORDER:
        value = getattr(record, attribute)
        if not value:
            continue
        if attribute == 'authors':
            value = ' and '.join(value)
        elif attribute in ('volume', 'number', 'pages'):
            value = _clean_number(value)
        entry[field] = value
    return entry


def _writer() -> BibTexWriter:
    writer = BibTexWriter()
    writer.display_order = [field for field, _ in FIELD_ORDER]
    writer.order_entries_by = None
    writer.indent = '  '
    return writer


def to_bibtex(record: CitationRecord, keys: Optional[Set[str]] = None) -> str:
    """One @misc entry; keys collects used keys across calls for deduplication"""
    database = BibDatabase()
    database.entries = [record_to_entry(record, keys if keys is not None else set())]
    return _writer().write(database)


def write_bibtex(records: List[CitationRecord], path: Path):
    keys: Set[str] = set()
    database = BibDatabase()
    database.entries = [record_to_entry(record, keys) for record in records]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(_writer().write(database))
    logger.info(f"Wrote {len(records)} BibTeX entries to {path}")
