import json
import random

import pytest

from citescan.dataset import parse_markup
from citescan.errors import DegenerateCorpus, EmptyCorpus, LexiconMissing, UnsupportedModelVersion
from citescan.models import AnnotatedComment, EntitySpan, EntityType
from citescan.ner import (TaggerModel, align_spans, all_labels, bio_to_spans, load_lexicons, merge_spans, recognize,
                          rule_tag, tag, tokenize, train)
from citescan.ner.perceptron import case_pattern, digit_pattern, word_shape

LORENTZIAN = 'TYPE-I Lorentzian, Becker, P. J. & Coppens, P. (1974). Acta Cryst. A30, 129;'


def spans_text(text, spans):
    return [(s.etype.value, s.text_in(text)) for s in spans]


# Tokens
def test_tokenize_examples():
    assert [t.text for t in tokenize('Coppens, P. (1974).')] == ['Coppens', ',', 'P', '.', '(', '1974', ')', '.']
    assert tokenize('') == []
    assert [t.text for t in tokenize('pp. 740-755')] == ['pp', '.', '740-755']


def test_tokenize_offsets():
    text = '  "Böhm, C."  (2006) '
    for token in tokenize(text):
        assert text[token.start:token.end] == token.text
    starts = [t.start for t in tokenize(text)]
    assert starts == sorted(starts)


# Rules
def test_rule_tag_examples(lexicons):
    assert spans_text('( 1974 )', rule_tag('( 1974 )', lexicons)) == [('year', '1974')]
    text = 'Vol. 30, No. 7'
    assert spans_text(text, rule_tag(text, lexicons)) == [('volume', 'Vol. 30'), ('number', 'No. 7')]
    assert rule_tag('hello world', lexicons) == []


def test_rule_tag_identifiers(lexicons):
    text = 'DOI: 10.1109 83.862633, ISBN 0-521-43108-5, ISSN 0038-092X, http: www.lomont.org Math'
    found = spans_text(text, rule_tag(text, lexicons))
    assert ('doi', '10.1109 83.862633') in found
    assert ('isbn', '0-521-43108-5') in found
    assert ('issn', '0038-092X') in found
    assert ('url', 'http: www.lomont.org') in found


def test_rule_tag_citation(lexicons):
    text = 'Knuth, D. E. (1984). Literate Programming. The Computer Journal, 27, 97-111.'
    found = spans_text(text, rule_tag(text, lexicons))
    assert ('author', 'Knuth, D. E.') in found
    assert ('year', '1984') in found
    assert ('title', 'Literate Programming') in found
    assert ('booktitle_or_journal', 'The Computer Journal') in found
    assert ('pages', '97-111') in found


def test_rule_tag_months_need_a_number(lexicons):
    assert spans_text('June 1989', rule_tag('June 1989', lexicons)) == [('month', 'June'), ('year', '1989')]
    assert rule_tag('may be null', lexicons) == []


def test_rule_tag_initial_p_is_not_pages(lexicons):
    text = 'Coppens, P. 129'
    assert ('author', 'Coppens, P.') in spans_text(text, rule_tag(text, lexicons))


def test_rule_tag_is_pure(lexicons):
    assert rule_tag(LORENTZIAN, lexicons) == rule_tag(LORENTZIAN, lexicons)


def test_missing_lexicon(tmp_path):
    (tmp_path / 'venues.txt').write_text('Acta Cryst\n', encoding='utf-8')
    with pytest.raises(LexiconMissing):
        load_lexicons(tmp_path)


def test_optional_lexicon(tmp_path):
    for name in ('venues', 'months', 'publishers'):
        (tmp_path / f'{name}.txt').write_text('# header\nSpringer\n', encoding='utf-8')
    lexicons = load_lexicons(tmp_path)
    assert 'springer' in lexicons.venues
    assert 'vienna' not in lexicons.places


# BIO
def test_all_labels():
    labels = all_labels()
    assert labels[0] == 'O'
    assert len(labels) == 1 + 2 * len(EntityType)


def test_bio_repair():
    tokens = tokenize('a b c d')
    spans = bio_to_spans(tokens, ['I-title', 'I-title', 'B-author', 'I-year'])
    assert [(s.etype.value, s.start, s.end) for s in spans] == [('title', 0, 3), ('author', 4, 5), ('year', 6, 7)]


def test_align_snaps_outward(caplog):
    text = 'Acta Cryst. A30'
    tokens = tokenize(text)
    labels = align_spans(text, tokens, [EntitySpan(etype=EntityType.TITLE, start=2, end=8)])
    assert labels == ['B-title', 'I-title', 'O', 'O']
    assert 'Snapped' in caplog.text


def test_feature_helpers():
    assert word_shape('Vol.') == 'Xx.'
    assert word_shape('1974') == 'd'
    assert case_pattern('ACM') == 'upper'
    assert case_pattern('Knuth') == 'title'
    assert digit_pattern('1974') == 'year'
    assert digit_pattern('740-755') == 'range'
    assert digit_pattern('A30') == 'has-digit'


# Training
def test_train_errors():
    with pytest.raises(EmptyCorpus):
        train([])
    with pytest.raises(DegenerateCorpus):
        train([AnnotatedComment(text='nothing to see here')])


def test_memorizes_one_example():
    comment = parse_markup('{author|Smith} ({year|1999})')
    model = train([comment], epochs=10, seed=42)
    assert [(s.etype, s.start, s.end) for s in tag(model, comment.text)] == \
        [(s.etype, s.start, s.end) for s in comment.gold]


def test_training_is_deterministic(gold, lexicons, model):
    again = train(gold, epochs=5, seed=42, lexicons=lexicons)
    assert again.to_json() == model.to_json()
    assert model.metadata['seed'] == 42
    assert model.metadata['epochs'] == 5
    assert model.metadata['comments'] == len(gold)


@pytest.mark.parametrize('seed', [1, 2])
def test_training_set_accuracy(gold, lexicons, seed):
    trained = train(gold, epochs=20, seed=seed, lexicons=lexicons)
    correct = total = 0
    for comment in gold:
        tokens = tokenize(comment.text)
        expected = align_spans(comment.text, tokens, comment.gold)
        labels = ['O'] * len(tokens)
        for span in tag(trained, comment.text):
            covered = [i for i, t in enumerate(tokens) if t.start >= span.start and t.end <= span.end]
            for position, i in enumerate(covered):
                labels[i] = f'{"B" if position == 0 else "I"}-{span.etype.value}'
        correct += sum(a == b for a, b in zip(labels, expected))
        total += len(tokens)
    assert correct / total >= 0.95


def test_crystallography_citation_is_tagged(model):
    found = spans_text(LORENTZIAN, recognize(model, LORENTZIAN))
    assert any(etype == 'author' and 'Becker' in value for etype, value in found)
    assert ('year', '1974') in found


def test_tag_empty(model):
    assert tag(model, '') == []


def test_spans_within_bounds_and_disjoint(model):
    rng = random.Random(5)
    words = ['Knuth', 'D.', 'E.', '(1984).', 'Vol.', '12,', 'pp.', '3-30', 'the', 'ACM', 'June', 'http:', 'x', '"a"']
    for _ in range(40):
        text = ' '.join(rng.choice(words) for _ in range(rng.randint(0, 25)))
        spans = recognize(model, text)
        for span in spans:
            assert 0 <= span.start < span.end <= len(text)
        for left, right in zip(spans, spans[1:]):
            assert left.end <= right.start


# Persistence
def test_model_round_trip(model, tmp_path):
    path = tmp_path / 'model.json'
    model.save(path)
    loaded = TaggerModel.load(path)
    assert loaded.to_json() == model.to_json()
    assert tag(loaded, LORENTZIAN) == tag(model, LORENTZIAN)


def test_model_version_check(model):
    payload = json.loads(model.to_json())
    payload['version'] = 99
    with pytest.raises(UnsupportedModelVersion):
        TaggerModel.from_json(json.dumps(payload))


# Merging
def span(etype, start, end, source='model'):
    return EntitySpan(etype=etype, start=start, end=end, source=source)


def test_merge_spans():
    author = span(EntityType.AUTHOR, 0, 6)
    assert merge_spans([author], [span(EntityType.AUTHOR, 0, 6, 'rule')]) == [author]
    year = span(EntityType.YEAR, 10, 14, 'rule')
    assert merge_spans([], [year]) == [year]
    title = span(EntityType.TITLE, 0, 20)
    assert merge_spans([title], [span(EntityType.BOOKTITLE_OR_JOURNAL, 15, 30, 'rule')]) == [title]
