"""
BIO encoding of entity spans over tokens, and decoding back with repair.
"""

import logging
from typing import List, Sequence

from ..models import EntitySpan, EntityType
from .tokens import Token

logger = logging.getLogger(__name__)

OUTSIDE = 'O'


def all_labels() -> List[str]:
    labels = [OUTSIDE]
    for etype in EntityType:
        labels += [f'B-{etype.value}', f'I-{etype.value}']
    return labels


def align_spans(text: str, tokens: Sequence[Token], spans: Sequence[EntitySpan]) -> List[str]:
    """Label every token; span edges that cut through a token are snapped outward"""
    labels = [OUTSIDE] * len(tokens)
    for span in sorted(spans, key=lambda s: s.start):
        covered = [i for i, tok in enumerate(tokens) if tok.start < span.end and span.start < tok.end]
        if not covered:
            logger.warning(f"Gold span {span.start}..{span.end} ({span.etype.value}) covers no token; ignored")
            continue
        first, last = covered[0], covered[-1]
        if tokens[first].start != span.start or tokens[last].end != span.end:
            logger.warning(f"Snapped misaligned {span.etype.value} span {span.text_in(text)!r} to "
                           f"{text[tokens[first].start:tokens[last].end]!r}")
        if any(labels[i] != OUTSIDE for i in covered):
            logger.warning(f"Gold span {span.start}..{span.end} overlaps a previous span after snapping; ignored")
            continue
        labels[first] = f'B-{span.etype.value}'
        for i in covered[1:]:
            labels[i] = f'I-{span.etype.value}'
    return labels


def bio_to_spans(tokens: Sequence[Token], labels: Sequence[str], source: str = 'model') -> List[EntitySpan]:
    """Decode BIO labels; I-X after O or after another type opens a new X span"""
    spans = []
    current_type, current_start, current_end = None, 0, 0

    def close():
        if current_type is not None:
            spans.append(EntitySpan(etype=EntityType(current_type), start=current_start,
                                    end=current_end, source=source))

    for token, label in zip(tokens, labels):
        if label == OUTSIDE:
            close()
            current_type = None
            continue
        prefix, etype = label.split('-', 1)
        if prefix == 'I' and etype == current_type:
            current_end = token.end
            continue
        close()
        current_type, current_start, current_end = etype, token.start, token.end
    close()
    return spans
