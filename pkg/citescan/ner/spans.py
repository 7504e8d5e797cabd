from pathlib import Path
from typing import List, Optional, Sequence

from ..models import EntitySpan
from ..parallel import ordered_map
from .lexicons import Lexicons, load_lexicons
from .perceptron import TaggerModel
from .rules import rule_tag

_worker_model: Optional[TaggerModel] = None


def merge_spans(model_spans: Sequence[EntitySpan], rule_spans: Sequence[EntitySpan]) -> List[EntitySpan]:
    """Union of both passes; a rule span survives only where no model span overlaps it"""
    merged = list(model_spans)
    for span in rule_spans:
        if not any(span.overlaps(kept) for kept in model_spans):
            merged.append(span)
    return sorted(merged, key=lambda s: s.start)


def recognize(model: TaggerModel, text: str, lexicons: Optional[Lexicons] = None) -> List[EntitySpan]:
    """Full recognition pass: tagger output backed by the rule tagger"""
    rule_spans = rule_tag(text, lexicons or model.lexicons)
    return merge_spans(model.tag(text, rule_spans), rule_spans)


def _init_worker(model_json: str, lexicon_dir: Optional[str]):
    global _worker_model
    lexicons = load_lexicons(Path(lexicon_dir)) if lexicon_dir else None
    _worker_model = TaggerModel.from_json(model_json, lexicons)


def _recognize_in_worker(text: str) -> List[EntitySpan]:
    return recognize(_worker_model, text)


def recognize_all(model: TaggerModel, texts: Sequence[str], jobs: int = 1,
                  lexicon_dir: Optional[Path] = None) -> List[List[EntitySpan]]:
    """Recognize many comments, in input order"""
    if jobs <= 1:
        return [recognize(model, text) for text in texts]
    return ordered_map(_recognize_in_worker, texts, jobs, initializer=_init_worker,
                       initargs=(model.to_json(), str(lexicon_dir) if lexicon_dir else None))
