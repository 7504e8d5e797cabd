"""
Dataset preparation: keyword filtering and grouping, sample sizing,
seeded sampling and annotation file I/O.
"""

import json
import logging
import math
import random
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, TypeVar, Union

from pydantic import BaseModel, Field, field_validator
from scipy.stats import norm

from .errors import OffsetOutOfBounds, ParseError, SampleTooLarge
from .models import AnnotatedComment, EntitySpan, EntityType, NormalizedComment

logger = logging.getLogger(__name__)

T = TypeVar('T')
CommentLike = Union[NormalizedComment, str]

DEFAULT_GOLD = Path(__file__).resolve().parent / 'data' / 'gold' / 'citations.txt'
_MARKUP = re.compile(r'\{([a-z_]+)\|([^{}]*)\}')


# Keyword groups
class KeywordGroupConfig(BaseModel):
    keyword: str
    markers: List[str] = []
    std_numbers: List[int] = []
    std_prefixes: List[str] = []

    @field_validator('keyword')
    @classmethod
    def validate_keyword(cls, v):
        if not v or v != v.lower():
            raise ValueError(f'keyword must be non-empty lowercase: {v!r}')
        return v

    def standard_pattern(self) -> Optional[re.Pattern]:
        """Prefix plus standard number joined by a space, hyphen or underscore"""
        if not self.std_numbers or not self.std_prefixes:
            return None
        prefixes = '|'.join(re.escape(p) for p in self.std_prefixes)
        numbers = '|'.join(str(n) for n in self.std_numbers)
        return re.compile(rf'(?:{prefixes})[ _-](?:{numbers})\b', re.IGNORECASE)


DEFAULT_GROUPS = {
    'acm': KeywordGroupConfig(keyword='acm', markers=['@acm.org']),
    'ieee': KeywordGroupConfig(
        keyword='ieee',
        markers=['ieee.org', 'ieee std'],
        std_numbers=[488, 754, 802, 854, 1003, 1076, 1149, 1275, 1284, 1355, 1363],
        std_prefixes=['IEEE'],
    ),
}


def _text_of(comment: CommentLike) -> str:
    return comment if isinstance(comment, str) else comment.text


def filter_keyword(comments: Sequence[CommentLike], keyword: str) -> List[CommentLike]:
    """Comments containing the keyword, case-insensitively"""
    needle = keyword.casefold()
    kept = [c for c in comments if needle in _text_of(c).casefold()]
    logger.info(f"{len(kept)} of {len(comments)} comments contain '{keyword}'")
    return kept


def group_comments(comments: Sequence[CommentLike],
                   config: KeywordGroupConfig) -> Tuple[List[CommentLike], List[CommentLike]]:
    """Split into group A (citation-prone) and group B (e-mail addresses, standards)"""
    markers = [m.casefold() for m in config.markers]
    standard = config.standard_pattern()
    group_a, group_b = [], []
    for comment in comments:
        text = _text_of(comment)
        folded = text.casefold()
        if any(m in folded for m in markers) or (standard is not None and standard.search(text)):
            group_b.append(comment)
        else:
            group_a.append(comment)
    logger.info(f"Keyword '{config.keyword}': group A {len(group_a)}, group B {len(group_b)}")
    return group_a, group_b


# Sampling
class SampleSpec(BaseModel):
    confidence: float = Field(default=0.95, gt=0, lt=1)
    interval: float = Field(default=5, gt=0)  # percentage points
    z: Optional[float] = None
    p: float = Field(default=0.5, gt=0, lt=1)

    @property
    def z_score(self) -> float:
        if self.z is not None:
            return self.z
        return round(float(norm.ppf(1 - (1 - self.confidence) / 2)), 2)


def sample_size(population: int, spec: SampleSpec = SampleSpec()) -> int:
    """Cochran's formula with finite-population correction, rounded half up"""
    if population < 1:
        raise ValueError(f"population must be >= 1, got {population}")
    e = spec.interval / 100
    n0 = spec.z_score ** 2 * spec.p * (1 - spec.p) / e ** 2
    n = n0 / (1 + (n0 - 1) / population)
    return min(population, math.floor(n + 0.5))


def draw_sample(items: Sequence[T], n: int, seed: int = 42) -> List[T]:
    """Uniform sample without replacement, in the items' original order"""
    if n > len(items) or n < 0:
        raise SampleTooLarge(f"cannot draw {n} items from {len(items)}")
    indices = list(range(len(items)))
    random.Random(seed).shuffle(indices)
    return [items[i] for i in sorted(indices[:n])]


# Annotations
def annotation_to_dict(comment: AnnotatedComment) -> dict:
    return {
        "text": comment.text,
        "entities": [{"start": s.start, "end": s.end, "type": s.etype.value} for s in comment.gold],
        "labels": comment.labels,
    }


def save_annotations(comments: Sequence[AnnotatedComment], path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for comment in comments:
            f.write(json.dumps(annotation_to_dict(comment), ensure_ascii=False) + '\n')
    logger.info(f"Saved {len(comments)} annotated comments to {path}")


def load_annotations(path: Path) -> List[AnnotatedComment]:
    comments = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                text = data['text']
                spans = []
                for entity in data.get('entities', []):
                    start, end = int(entity['start']), int(entity['end'])
                    if start < 0 or end > len(text):
                        raise OffsetOutOfBounds(f"span {start}..{end} outside text of length {len(text)}",
                                                path=str(path), line=lineno)
                    spans.append(EntitySpan(etype=EntityType(entity['type']), start=start, end=end))
                comments.append(AnnotatedComment(text=text, gold=spans, labels=data.get('labels', {})))
            except OffsetOutOfBounds:
                raise
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"invalid annotation: {e}", path=str(path), line=lineno)
    logger.info(f"Loaded {len(comments)} annotated comments from {path}")
    return comments


def parse_markup(line: str) -> AnnotatedComment:
    """Turn 'see {author|Knuth, D.} ({year|1984})' into text plus gold spans"""
    parts, spans = [], []
    position, cursor = 0, 0
    for match in _MARKUP.finditer(line):
        parts.append(line[cursor:match.start()])
        position += match.start() - cursor
        etype, inner = match.groups()
        if not inner:
            raise ValueError(f"empty {etype} span")
        spans.append(EntitySpan(etype=EntityType(etype), start=position, end=position + len(inner)))
        parts.append(inner)
        position += len(inner)
        cursor = match.end()
    parts.append(line[cursor:])
    text = ''.join(parts)
    if '{' in text or '}' in text:
        raise ValueError("unbalanced entity markup")
    return AnnotatedComment(text=text, gold=spans)


def load_gold(path: Optional[Path] = None) -> List[AnnotatedComment]:
    """Load a gold corpus in entity markup, one comment per line"""
    path = Path(path) if path else DEFAULT_GOLD
    comments = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip('\n')
            if not line.strip() or line.startswith('#'):
                continue
            try:
                comments.append(parse_markup(line))
            except ValueError as e:
                raise ParseError(str(e), path=str(path), line=lineno)
    cites = sum(c.cites for c in comments)
    logger.info(f"Loaded gold corpus from {path}: {cites} citing, {len(comments) - cites} other comments")
    return comments
