"""
Evaluation harness: precision/recall/F1, k-fold cross-validation over
entity-set combinations, distance-threshold sweeps, per-entity accuracy
and inter-annotator agreement.
"""

import logging
import random
from pathlib import Path
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from .detect import baseline_detect, detect
from .errors import DegenerateCorpus, EvaluationError, LengthMismatch, TooFewItems
from .models import FOUR_ENTITIES, AnnotatedComment, DetectionCriterion, EntitySpan, EntityType
from .ner import recognize, train
from .ner.lexicons import Lexicons, load_lexicons
from .ner.perceptron import TaggerModel
from .parallel import ordered_map

logger = logging.getLogger(__name__)

KAPPA_THRESHOLD = 0.75
MATCH_OVERLAP = 0.5

A, T, Y, V = EntityType.AUTHOR, EntityType.TITLE, EntityType.YEAR, EntityType.BOOKTITLE_OR_JOURNAL

# Entity-set combinations compared in the cross-validation table, by precision
TABLE_COMBOS: List[FrozenSet[EntityType]] = [
    FOUR_ENTITIES,
    frozenset({T, Y, V}),
    frozenset({A, Y, V}),
    frozenset({A, T, V}),
    frozenset({Y, V}),
]


class Metrics(BaseModel):
    tp: int = Field(ge=0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def prf(tp: int, fp: int, fn: int) -> Metrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return Metrics(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1_score(precision, recall))


def score(gold: Sequence[bool], predicted: Sequence[bool]) -> Metrics:
    """Comment-level scoring: does the comment contain a citation?"""
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels but {len(predicted)} predictions")
    if not gold:
        return prf(0, 0, 0)
    gold, predicted = [bool(g) for g in gold], [bool(p) for p in predicted]
    _, fp, fn, tp = confusion_matrix(gold, predicted, labels=[False, True]).ravel()
    precision, recall, f1, _ = precision_recall_fscore_support(gold, predicted, average='binary', pos_label=True,
                                                               zero_division=0)
    return Metrics(tp=int(tp), fp=int(fp), fn=int(fn), precision=float(precision), recall=float(recall),
                   f1=float(f1))


# Folds
class FoldAssignment(BaseModel):
    k: int
    seed: int
    assignment: List[int]

    def folds(self) -> List[List[int]]:
        folds = [[] for _ in range(self.k)]
        for index, fold in enumerate(self.assignment):
            folds[fold].append(index)
        return folds


def kfold(n_items: int, k: int, seed: int = 42) -> FoldAssignment:
    """Seeded shuffle, then round-robin assignment"""
    if k < 2 or n_items < k:
        raise TooFewItems(f"cannot split {n_items} items into {k} folds")
    order = list(range(n_items))
    random.Random(seed).shuffle(order)
    assignment = [0] * n_items
    for position, index in enumerate(order):
        assignment[index] = position % k
    return FoldAssignment(k=k, seed=seed, assignment=assignment)


def combo_label(combo: FrozenSet[EntityType]) -> str:
    return DetectionCriterion(required_types=combo).label()


# Cross-validation
def _run_fold(job: Tuple[List[AnnotatedComment], List[str], int, int, Optional[str]]) -> List[List[EntitySpan]]:
    train_items, test_texts, epochs, seed, lexicon_dir = job
    lexicons = load_lexicons(Path(lexicon_dir)) if lexicon_dir else None
    model = train(train_items, epochs=epochs, seed=seed, lexicons=lexicons)
    return [recognize(model, text) for text in test_texts]


def held_out_predictions(gold: Sequence[AnnotatedComment], k: int = 10, seed: int = 42, epochs: int = 5,
                         jobs: int = 1, lexicon_dir: Optional[Path] = None) -> List[List[EntitySpan]]:
    """Spans for every comment from a model that never saw it"""
    if not any(c.cites for c in gold) or all(c.cites for c in gold):
        raise DegenerateCorpus("cross-validation needs both citing and non-citing comments")
    folds = kfold(len(gold), k, seed).folds()

    jobs_args = []
    for held_out in folds:
        held = set(held_out)
        train_items = [c for i, c in enumerate(gold) if i not in held]
        jobs_args.append((train_items, [gold[i].text for i in held_out], epochs, seed,
                          str(lexicon_dir) if lexicon_dir else None))

    predictions: List[Optional[List[EntitySpan]]] = [None] * len(gold)
    for fold_number, (held_out, spans) in enumerate(zip(folds, ordered_map(_run_fold, jobs_args, jobs)), 1):
        for index, predicted in zip(held_out, spans):
            predictions[index] = predicted
        logger.info(f"Fold {fold_number}/{k}: tagged {len(held_out)} held-out comments")
    return predictions


def cross_validate(gold: Sequence[AnnotatedComment], k: int = 10, seed: int = 42,
                   combos: Sequence[FrozenSet[EntityType]] = TABLE_COMBOS, max_gap: int = 10,
                   epochs: int = 5, jobs: int = 1, lexicon_dir: Optional[Path] = None,
                   predictions: Optional[List[List[EntitySpan]]] = None) -> Dict[FrozenSet[EntityType], Metrics]:
    """Micro-averaged comment-level metrics per entity combination"""
    if predictions is None:
        predictions = held_out_predictions(gold, k, seed, epochs, jobs, lexicon_dir)
    truth = [c.cites for c in gold]

    results = {}
    for combo in combos:
        criterion = DetectionCriterion(required_types=combo, max_gap=max_gap)
        detected = [detect(c.text, spans, criterion).detected for c, spans in zip(gold, predictions)]
        results[combo] = score(truth, detected)
        m = results[combo]
        logger.info(f"[{combo_label(combo)}] P={m.precision:.2f} R={m.recall:.2f} F1={m.f1:.2f}")
    return results


def sensitivity_sweep(gold: Sequence[AnnotatedComment], model: Optional[TaggerModel],
                      combo: FrozenSet[EntityType] = FOUR_ENTITIES, d_values: Sequence[int] = range(0, 21),
                      predictions: Optional[List[List[EntitySpan]]] = None,
                      lexicons: Optional[Lexicons] = None) -> List[Tuple[int, Metrics]]:
    """Detection metrics at every distance threshold, with a fixed tagger"""
    d_values = list(d_values)
    if d_values != sorted(d_values):
        raise EvaluationError("distance thresholds must be sorted ascending")
    if predictions is None:
        predictions = [recognize(model, c.text, lexicons) for c in gold]
    truth = [c.cites for c in gold]

    curve = []
    previous: Optional[set] = None
    for d in d_values:
        criterion = DetectionCriterion(required_types=combo, max_gap=d)
        detected = [detect(c.text, spans, criterion).detected for c, spans in zip(gold, predictions)]
        current = {i for i, hit in enumerate(detected) if hit}
        if previous is not None and not previous <= current:
            raise EvaluationError(f"detections at D={d} are not a superset of the previous threshold")
        previous = current
        curve.append((d, score(truth, detected)))
    return curve


def best_threshold(curve: Sequence[Tuple[int, Metrics]]) -> int:
    """F1-maximizing distance; ties go to the smallest"""
    if not curve:
        raise EvaluationError("empty sweep")
    return max(curve, key=lambda point: (point[1].f1, -point[0]))[0]


# Entities
class EntityAccuracy(BaseModel):
    counts: Dict[EntityType, Dict[str, int]] = {}

    def add(self, etype: EntityType, category: str):
        bucket = self.counts.setdefault(etype, {'correct': 0, 'partially_correct': 0, 'incorrect': 0})
        bucket[category] += 1

    def proportions(self, etype: EntityType) -> Dict[str, float]:
        bucket = self.counts.get(etype, {})
        total = sum(bucket.values())
        return {name: count / total for name, count in bucket.items()} if total else {}


def spans_match(predicted: EntitySpan, gold: EntitySpan) -> bool:
    if predicted.etype != gold.etype:
        return False
    overlap = min(predicted.end, gold.end) - max(predicted.start, gold.start)
    shorter = min(predicted.end - predicted.start, gold.end - gold.start)
    return overlap >= MATCH_OVERLAP * shorter


def entity_accuracy(gold: Sequence[AnnotatedComment], predicted: Sequence[Sequence[EntitySpan]]) -> EntityAccuracy:
    """Per comment and type: correct, partially correct or incorrect"""
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold comments but {len(predicted)} predictions")
    accuracy = EntityAccuracy()
    for comment, spans in zip(gold, predicted):
        for etype in EntityType:
            gold_spans = [s for s in comment.gold if s.etype == etype]
            if not gold_spans:
                continue
            guesses = [s for s in spans if s.etype == etype]
            hits = sum(any(spans_match(p, g) for g in gold_spans) for p in guesses)
            if guesses and hits == len(guesses):
                accuracy.add(etype, 'correct')
            elif hits == 0:
                accuracy.add(etype, 'incorrect')
            else:
                accuracy.add(etype, 'partially_correct')
    return accuracy


def mean_entity_counts(gold: Sequence[AnnotatedComment],
                       predicted: Sequence[Sequence[EntitySpan]]) -> Tuple[float, float]:
    """Average number of identified entities in citing and in other comments"""
    cite = [len(spans) for c, spans in zip(gold, predicted) if c.cites]
    other = [len(spans) for c, spans in zip(gold, predicted) if not c.cites]
    return (float(np.mean(cite)) if cite else 0.0, float(np.mean(other)) if other else 0.0)


def baseline_overlap(texts: Sequence[str], detected: Sequence[bool]) -> float:
    """Share of pipeline detections the pattern baseline also finds"""
    hits = [baseline_detect(text) for text, flag in zip(texts, detected) if flag]
    return sum(hits) / len(hits) if hits else 0.0


# Agreement
def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    if len(labels_a) != len(labels_b) or not labels_a:
        raise LengthMismatch(f"label lists have lengths {len(labels_a)} and {len(labels_b)}")
    categories = sorted(set(labels_a) | set(labels_b), key=str)
    index = {c: i for i, c in enumerate(categories)}
    matrix = np.zeros((len(categories), len(categories)), dtype=np.int64)
    for a, b in zip(labels_a, labels_b):
        matrix[index[a], index[b]] += 1

    total = float(matrix.sum())
    observed = np.trace(matrix) / total
    expected = float(np.dot(matrix.sum(axis=1) / total, matrix.sum(axis=0) / total))
    if expected == 1.0:
        return 1.0
    return float((observed - expected) / (1.0 - expected))


def kappa_flag(kappa: float) -> bool:
    """True when agreement is not above the acceptance threshold"""
    return kappa <= KAPPA_THRESHOLD


# Reports
def metrics_frame(rows: Sequence[Tuple[str, int, Metrics]]) -> pd.DataFrame:
    return pd.DataFrame(
        [{'combo': combo, 'D': d, **m.model_dump()} for combo, d, m in rows],
        columns=['combo', 'D', 'tp', 'fp', 'fn', 'precision', 'recall', 'f1'],
    )


def entity_accuracy_frame(accuracy: EntityAccuracy) -> pd.DataFrame:
    rows = []
    for etype in EntityType:
        if etype not in accuracy.counts:
            continue
        counts = accuracy.counts[etype]
        shares = accuracy.proportions(etype)
        rows.append({
            'entity': etype.value,
            **counts,
            'total': sum(counts.values()),
            **{f'{name}_pct': round(100 * share, 1) for name, share in shares.items()},
        })
    return pd.DataFrame(rows)


def write_csv(frame: pd.DataFrame, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote {len(frame)} rows to {path}")
