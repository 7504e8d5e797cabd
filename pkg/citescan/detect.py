"""
Citation detection over tagged comments.
Applies the entity-set and distance criterion, splits multi-citation comments
into records, and provides the surname/year/volume/page pattern baseline.
"""

import json
import logging
import re
from pathlib import Path
from typing import List, Sequence

from pydantic import BaseModel

from .errors import EmptySpans, ParseError
from .models import (RECORD_FIELDS, CitationRecord, DetectionCriterion, DetectionResult, EntitySpan, EntityType,
                     Language)

logger = logging.getLogger(__name__)

MIN_TRAILING_TYPES = 2


def largest_gap(spans: Sequence[EntitySpan]) -> int:
    """Largest character distance between consecutive spans, spaces included"""
    if not spans:
        raise EmptySpans("largest_gap needs at least one span")
    ordered = sorted(spans, key=lambda s: s.start)
    return max((max(0, b.start - a.end) for a, b in zip(ordered, ordered[1:])), default=0)


def detect(text: str, spans: Sequence[EntitySpan], criterion: DetectionCriterion = DetectionCriterion()) -> DetectionResult:
    """Detected iff every required type is present and no gap exceeds max_gap"""
    if not spans:
        return DetectionResult(detected=False, largest_gap=0, reason='missing_types')

    gap = largest_gap(spans)
    present = {span.etype for span in spans}
    if not criterion.required_types <= present:
        return DetectionResult(detected=False, largest_gap=gap, reason='missing_types')
    if gap > criterion.max_gap:
        return DetectionResult(detected=False, largest_gap=gap, reason='gap_exceeded')
    return DetectionResult(detected=True, records=segment_citations(spans, text), largest_gap=gap, reason='ok')


def segment_citations(spans: Sequence[EntitySpan], text: str) -> List[CitationRecord]:
    """Split spans into records; a non-author type already in the current record closes it"""
    groups: List[List[EntitySpan]] = []
    current: List[EntitySpan] = []

    for span in sorted(spans, key=lambda s: s.start):
        if span.etype != EntityType.AUTHOR and any(s.etype == span.etype for s in current):
            groups.append(current)
            current = []
        current.append(span)

    if current:
        if groups and len({s.etype for s in current}) < MIN_TRAILING_TYPES:
            groups[-1].extend(current)
        else:
            groups.append(current)

    return [build_record(group, text) for group in groups]


def build_record(spans: Sequence[EntitySpan], text: str) -> CitationRecord:
    fields = {'authors': []}
    for span in spans:
        value = span.text_in(text).strip()
        name = RECORD_FIELDS[span.etype]
        if span.etype == EntityType.AUTHOR:
            fields['authors'].append(value)
        elif name not in fields:
            fields[name] = value
    return CitationRecord(
        **fields,
        span=(min(s.start for s in spans), max(s.end for s in spans)),
        source_comment=text,
        entities=list(spans),
    )


# Pattern baseline
_BASELINE_SURNAME = re.compile(r'\b[A-Z][a-z]+')
_BASELINE_YEAR = re.compile(r'\b(\d{4})\b')
_BASELINE_VOLUME = re.compile(r'\b[Vv]ol(?:ume)?\.?\s*\d+|\b\d+\s*\(\d+\)')
_BASELINE_PAGE = re.compile(r'\b(?:p|pp|pages)\.?\s*\d+|\b\d+\s*-{1,2}\s*\d+\b')


def baseline_detect(text: str) -> bool:
    """Surname, year, volume and initial page number must all co-occur"""
    has_year = any(1900 <= int(m.group(1)) <= 2029 for m in _BASELINE_YEAR.finditer(text))
    return bool(has_year and _BASELINE_SURNAME.search(text)
                and _BASELINE_VOLUME.search(text) and _BASELINE_PAGE.search(text))


# Detection output
class DetectedComment(BaseModel):
    lang: Language
    text: str
    largest_gap: int
    records: List[CitationRecord]

    def to_dict(self) -> dict:
        return {
            "lang": self.lang.value,
            "text": self.text,
            "largest_gap": self.largest_gap,
            "records": [record.model_dump(exclude_none=True, exclude={'source_comment'}) for record in self.records],
        }


def write_detections(detections: List[DetectedComment], path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for detection in detections:
            f.write(json.dumps(detection.to_dict(), ensure_ascii=False) + '\n')
    logger.info(f"Wrote {len(detections)} detections to {path}")


def read_detections(path: Path) -> List[DetectedComment]:
    detections = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                records = [CitationRecord(**{**r, 'span': tuple(r['span']), 'source_comment': data['text']})
                           for r in data['records']]
                detections.append(DetectedComment(lang=Language(data['lang']), text=data['text'],
                                                  largest_gap=data['largest_gap'], records=records))
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"invalid detection record: {e}", path=str(path), line=lineno)
    logger.info(f"Loaded {len(detections)} detections from {path}")
    return detections
