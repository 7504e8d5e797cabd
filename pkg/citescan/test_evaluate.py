from pathlib import Path

import pytest

from citescan.dataset import load_annotations
from citescan.errors import DegenerateCorpus, EvaluationError, LengthMismatch, TooFewItems
from citescan.evaluate import (TABLE_COMBOS, baseline_overlap, best_threshold, cohen_kappa, combo_label,
                               cross_validate, entity_accuracy, entity_accuracy_frame, f1_score, held_out_predictions,
                               kappa_flag, kfold, mean_entity_counts, metrics_frame, prf, score,
                               sensitivity_sweep, spans_match, write_csv)
from citescan.models import FOUR_ENTITIES, AnnotatedComment, EntitySpan, EntityType

PAPER_TYPES = Path(__file__).resolve().parent / 'data' / 'gold' / 'paper_types.jsonl'


@pytest.fixture(scope='module')
def predictions(gold):
    return held_out_predictions(gold, k=10, seed=42, epochs=5)


# Metrics
def test_prf():
    m = prf(tp=8, fp=2, fn=8)
    assert (m.precision, m.recall) == (0.8, 0.5)
    assert m.f1 == pytest.approx(2 * 0.8 * 0.5 / 1.3)
    assert prf(0, 0, 0).f1 == 0.0


def test_f1_of_published_points():
    assert f1_score(0.82, 1.00) == pytest.approx(0.90, abs=0.005)
    assert f1_score(0.99, 0.78) == pytest.approx(0.87, abs=0.005)
    assert f1_score(0.0, 0.0) == 0.0


def test_score():
    m = score([True, True, False, False], [True, False, True, False])
    assert (m.tp, m.fp, m.fn) == (1, 1, 1)
    assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)


def test_score_agrees_with_counts():
    gold = [True] * 16 + [False] * 4
    predicted = [True] * 8 + [False] * 8 + [True, True, False, False]
    m, expected = score(gold, predicted), prf(tp=8, fp=2, fn=8)
    assert (m.tp, m.fp, m.fn) == (8, 2, 8)
    assert (m.precision, m.recall) == (expected.precision, expected.recall)
    assert m.f1 == pytest.approx(expected.f1)


def test_score_without_positives():
    m = score([False, False], [False, False])
    assert (m.tp, m.fp, m.fn, m.precision, m.recall, m.f1) == (0, 0, 0, 0.0, 0.0, 0.0)
    assert score([], []) == prf(0, 0, 0)
    with pytest.raises(LengthMismatch):
        score([True], [True, False])


# Folds
def test_kfold():
    folds = kfold(23, 5, seed=1).folds()
    assert sorted(i for fold in folds for i in fold) == list(range(23))
    assert sorted(len(f) for f in folds) == [4, 4, 5, 5, 5]
    assert kfold(23, 5, seed=1) == kfold(23, 5, seed=1)
    with pytest.raises(TooFewItems):
        kfold(3, 5)
    with pytest.raises(TooFewItems):
        kfold(10, 1)


def test_held_out_needs_both_classes(gold):
    with pytest.raises(DegenerateCorpus):
        held_out_predictions([c for c in gold if c.cites], k=2)


# Cross-validation
def test_cross_validation(gold, predictions):
    results = cross_validate(gold, k=10, predictions=predictions)
    assert list(results) == TABLE_COMBOS
    four = results[FOUR_ENTITIES]
    assert four.f1 >= 0.75
    assert four.precision == max(m.precision for m in results.values())
    for combo, m in results.items():
        # fewer required types can only add detections
        assert m.tp >= four.tp
        assert m.tp + m.fp >= four.tp + four.fp
        assert m.tp + m.fn == four.tp + four.fn
    assert combo_label(FOUR_ENTITIES) == 'author, title, year, booktitle_or_journal'


def test_cross_validation_is_deterministic(gold, predictions):
    again = held_out_predictions(gold, k=10, seed=42, epochs=5)
    assert again == predictions


def test_sensitivity_sweep(gold, model, lexicons):
    curve = sensitivity_sweep(gold, model, d_values=range(3, 11), lexicons=lexicons)
    assert [d for d, _ in curve] == list(range(3, 11))
    recalls = [m.recall for _, m in curve]
    assert recalls == sorted(recalls)
    assert best_threshold(curve) in range(3, 11)
    with pytest.raises(EvaluationError):
        sensitivity_sweep(gold, model, d_values=[5, 3], lexicons=lexicons)


def test_best_threshold_prefers_smallest():
    curve = [(3, prf(5, 5, 5)), (4, prf(8, 2, 2)), (5, prf(8, 2, 2)), (6, prf(9, 9, 1))]
    assert best_threshold(curve) == 4
    with pytest.raises(EvaluationError):
        best_threshold([])


# Entities
def span(etype, start, end):
    return EntitySpan(etype=etype, start=start, end=end)


def test_spans_match():
    gold = span(EntityType.TITLE, 10, 30)
    assert spans_match(span(EntityType.TITLE, 10, 30), gold)
    assert spans_match(span(EntityType.TITLE, 20, 26), gold)
    assert not spans_match(span(EntityType.TITLE, 28, 40), gold)
    assert not spans_match(span(EntityType.AUTHOR, 10, 30), gold)


def test_entity_accuracy_identical(gold):
    accuracy = entity_accuracy(gold, [c.gold for c in gold])
    for etype in accuracy.counts:
        assert accuracy.proportions(etype) == {'correct': 1.0, 'partially_correct': 0.0, 'incorrect': 0.0}
    frame = entity_accuracy_frame(accuracy)
    assert set(frame['entity']) == {e.value for e in EntityType}
    assert (frame['correct_pct'] == 100.0).all()


def test_entity_accuracy_categories():
    comment = AnnotatedComment(text='x' * 50, gold=[span(EntityType.AUTHOR, 0, 5), span(EntityType.AUTHOR, 10, 15),
                                                   span(EntityType.YEAR, 20, 24), span(EntityType.TITLE, 30, 40)])
    predicted = [span(EntityType.AUTHOR, 0, 5), span(EntityType.AUTHOR, 40, 45), span(EntityType.YEAR, 20, 24)]
    accuracy = entity_accuracy([comment], [predicted])
    assert accuracy.counts[EntityType.AUTHOR]['partially_correct'] == 1
    assert accuracy.counts[EntityType.YEAR]['correct'] == 1
    assert accuracy.counts[EntityType.TITLE]['incorrect'] == 1
    with pytest.raises(LengthMismatch):
        entity_accuracy([comment], [])


def test_mean_entity_counts(gold, predictions):
    citing, other = mean_entity_counts(gold, predictions)
    assert citing > other


def test_baseline_overlap(gold):
    texts = [c.text for c in gold]
    share = baseline_overlap(texts, [c.cites for c in gold])
    assert 0.0 <= share <= 1.0
    assert baseline_overlap(texts, [False] * len(texts)) == 0.0


# Agreement
def test_cohen_kappa():
    labels = ['journal', 'book', 'web', 'journal']
    assert cohen_kappa(labels, labels) == 1.0
    assert cohen_kappa([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.0, abs=1e-12)
    assert cohen_kappa(['a'] * 4, ['a'] * 4) == 1.0
    a, b = ['x', 'y', 'y', 'z', 'x'], ['x', 'y', 'z', 'z', 'y']
    assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a))
    assert cohen_kappa(a, b) <= 1.0
    with pytest.raises(LengthMismatch):
        cohen_kappa(['a'], ['a', 'b'])
    with pytest.raises(LengthMismatch):
        cohen_kappa([], [])


def test_paper_type_agreement():
    comments = load_annotations(PAPER_TYPES)
    kappa = cohen_kappa([c.labels['annotator_a'] for c in comments], [c.labels['annotator_b'] for c in comments])
    assert kappa == pytest.approx(0.837, abs=0.01)
    assert not kappa_flag(kappa)
    assert kappa_flag(0.75)


# Reports
def test_metrics_frame(tmp_path):
    frame = metrics_frame([('A+T+Y+V', 10, prf(3, 1, 2))])
    assert list(frame.columns) == ['combo', 'D', 'tp', 'fp', 'fn', 'precision', 'recall', 'f1']
    path = tmp_path / 'metrics.csv'
    write_csv(frame, path)
    assert path.read_text(encoding='utf-8').splitlines()[0] == 'combo,D,tp,fp,fn,precision,recall,f1'
