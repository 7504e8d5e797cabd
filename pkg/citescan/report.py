"""
Analytics over detection output: citation counts per comment, popular titles,
venues, decades and languages, plus duplicate-title search over raw comments.
"""

import json
import logging
import re
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Sequence

import pandas as pd
from pydantic import BaseModel, model_validator

from .detect import DetectedComment
from .extract import normalize
from .models import Language, NormalizedComment

logger = logging.getLogger(__name__)

OLDEST_DECADE = 1950
UNKNOWN = 'unknown'
_YEAR = re.compile(r'(\d{4})')
_TRAILING_PUNCTUATION = '.,;:'


class Histogram(BaseModel):
    buckets: Dict[str, int] = {}
    total: int = 0

    @model_validator(mode='after')
    def check_total(self):
        if any(count < 0 for count in self.buckets.values()):
            raise ValueError('bucket counts must be non-negative')
        if self.total != sum(self.buckets.values()):
            raise ValueError('total must equal the sum of bucket counts')
        return self

    @classmethod
    def of(cls, buckets: Dict[str, int]) -> 'Histogram':
        return cls(buckets=buckets, total=sum(buckets.values()))

    def frame(self, label: str) -> pd.DataFrame:
        return pd.DataFrame([{label: k, 'count': v} for k, v in self.buckets.items()], columns=[label, 'count'])


class TitleCount(BaseModel):
    title: str
    count: int
    per_language: Dict[str, int]


class SearchResult(BaseModel):
    total_matches: int
    distinct_matches: int
    variants: List[str]


def normalize_title(title: str) -> str:
    return " ".join(title.casefold().split()).rstrip(_TRAILING_PUNCTUATION).strip()


def citations_per_comment(results: Sequence[DetectedComment]) -> Histogram:
    counts = Counter(len(r.records) for r in results)
    return Histogram.of({str(n): counts[n] for n in sorted(counts)})


def _ranked(counts: Counter, languages: Dict[str, Counter], min_count: int) -> List[TitleCount]:
    ranked = sorted(((key, n) for key, n in counts.items() if n >= min_count), key=lambda kv: (-kv[1], kv[0]))
    return [TitleCount(title=key, count=n, per_language=_ordered_languages(languages[key])) for key, n in ranked]


def _ordered_languages(counts: Counter) -> Dict[str, int]:
    return {lang.value: counts[lang.value] for lang in Language if counts[lang.value]}


def top_titles(results: Sequence[DetectedComment], min_count: int = 1) -> List[TitleCount]:
    """Normalized titles counted per record, most cited first"""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter = Counter()
    languages: Dict[str, Counter] = defaultdict(Counter)
    for result in results:
        for record in result.records:
            if record.title and normalize_title(record.title):
                key = normalize_title(record.title)
                counts[key] += 1
                languages[key][result.lang.value] += 1
    return _ranked(counts, languages, min_count)


def venue_frequency(results: Sequence[DetectedComment], min_count: int = 1) -> List[TitleCount]:
    """Distinct publications per venue, with per-language counts"""
    publications: Dict[str, set] = defaultdict(set)
    languages: Dict[str, Counter] = defaultdict(Counter)
    for result in results:
        for record in result.records:
            if not record.venue or not normalize_title(record.venue):
                continue
            venue = normalize_title(record.venue)
            publication = normalize_title(record.title) if record.title else \
                (tuple(record.authors), record.year, record.volume, record.pages)
            if publication not in publications[venue]:
                publications[venue].add(publication)
                languages[venue][result.lang.value] += 1
    counts = Counter({venue: len(pubs) for venue, pubs in publications.items()})
    return _ranked(counts, languages, min_count)


def decade_of(year: str) -> str:
    match = _YEAR.search(year or '')
    if not match:
        return UNKNOWN
    value = int(match.group(1))
    if value < OLDEST_DECADE:
        return f'<{OLDEST_DECADE}'
    return f'{value // 10 * 10}s'


def _decade_order(bucket: str):
    if bucket.startswith('<'):
        return (0, bucket)
    if bucket == UNKNOWN:
        return (2, bucket)
    return (1, bucket)


def decade_histogram(results: Sequence[DetectedComment]) -> Histogram:
    counts = Counter(decade_of(record.year) for r in results for record in r.records)
    return Histogram.of({bucket: counts[bucket] for bucket in sorted(counts, key=_decade_order)})


def per_language_counts(results: Sequence[DetectedComment]) -> Dict[str, int]:
    return _ordered_languages(Counter(r.lang.value for r in results))


def top_titles_by_decade(results: Sequence[DetectedComment], per_decade: int = 3) -> Dict[str, List[TitleCount]]:
    """Most cited titles within each decade bucket"""
    by_decade: Dict[str, List[DetectedComment]] = defaultdict(list)
    for result in results:
        for record in result.records:
            by_decade[decade_of(record.year)].append(
                DetectedComment(lang=result.lang, text=result.text, largest_gap=result.largest_gap, records=[record]))
    return {decade: top_titles(by_decade[decade])[:per_decade] for decade in sorted(by_decade, key=_decade_order)}


def iter_occurrences(comments: Iterable[NormalizedComment]) -> Iterator[str]:
    """Expand distinct comments back into the raw comment stream"""
    for comment in comments:
        for _ in range(comment.occurrences):
            yield comment.text


def search_title(texts: Iterable[str], query: str) -> SearchResult:
    """Case-insensitive search over every comment occurrence, duplicates included"""
    needle = normalize(query).casefold()
    if not needle:
        raise ValueError("query must be non-empty")
    total = 0
    variants = set()
    for text in texts:
        normalized = normalize(text)
        if needle in normalized.casefold():
            total += 1
            variants.add(normalized)
    return SearchResult(total_matches=total, distinct_matches=len(variants), variants=sorted(variants))


def corpus_summary(comments: Sequence[NormalizedComment]) -> pd.DataFrame:
    """Distinct comments, occurrences and contributing repositories per language"""
    rows = []
    for lang in Language:
        selected = [c for c in comments if c.language == lang]
        if not selected:
            continue
        rows.append({
            'language': lang.value,
            'distinct_comments': len(selected),
            'occurrences': sum(c.occurrences for c in selected),
            'repositories': len({p.repo for c in selected for p in c.provenance}),
        })
    return pd.DataFrame(rows, columns=['language', 'distinct_comments', 'occurrences', 'repositories'])


def ranking_frame(ranking: Sequence[TitleCount], label: str) -> pd.DataFrame:
    rows = []
    for entry in ranking:
        row = {label: entry.title, 'count': entry.count}
        row.update({lang.value: entry.per_language.get(lang.value, 0) for lang in Language})
        rows.append(row)
    return pd.DataFrame(rows, columns=[label, 'count'] + [lang.value for lang in Language])


def build_report(results: Sequence[DetectedComment], min_count: int = 20) -> Dict[str, pd.DataFrame]:
    """All report tables, keyed by section name"""
    languages = per_language_counts(results)
    decade_rows = [{'decade': decade, 'rank': rank, 'title': entry.title, 'count': entry.count}
                   for decade, entries in top_titles_by_decade(results).items()
                   for rank, entry in enumerate(entries, 1)]
    return {
        'languages': pd.DataFrame([{'language': k, 'detected_comments': v} for k, v in languages.items()],
                                  columns=['language', 'detected_comments']),
        'citations_per_comment': citations_per_comment(results).frame('citations'),
        'top_titles': ranking_frame(top_titles(results, min_count), 'title'),
        'venues': ranking_frame(venue_frequency(results, min_count), 'venue'),
        'decades': decade_histogram(results).frame('decade'),
        'top_titles_by_decade': pd.DataFrame(decade_rows, columns=['decade', 'rank', 'title', 'count']),
    }


def write_report(tables: Dict[str, pd.DataFrame], output_dir: Path, fmt: str = 'md') -> List[Path]:
    """Write tables as CSV files, one Markdown summary or one JSON document"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if fmt == 'csv':
        for name, frame in tables.items():
            path = output_dir / f'{name}.csv'
            frame.to_csv(path, index=False, lineterminator='\n')
            written.append(path)
    elif fmt == 'md':
        path = output_dir / 'report.md'
        sections = [f"## {name.replace('_', ' ').capitalize()}\n\n"
                    f"{frame.to_markdown(index=False) if len(frame) else '(none)'}\n" for name, frame in tables.items()]
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write("# Citation report\n\n" + "\n".join(sections))
        written.append(path)
    elif fmt == 'json':
        path = output_dir / 'report.json'
        document = {name: frame.to_dict(orient='records') for name, frame in tables.items()}
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(document, f, indent=2, ensure_ascii=False)
        written.append(path)
    else:
        raise ValueError(f"unknown report format: {fmt}")

    logger.info(f"Wrote {len(written)} report file(s) to {output_dir}")
    return written
