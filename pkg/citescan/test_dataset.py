import math
from collections import Counter

import pytest

from citescan.dataset import (DEFAULT_GROUPS, KeywordGroupConfig, SampleSpec, draw_sample, filter_keyword,
                              group_comments, load_annotations, load_gold, parse_markup, sample_size,
                              save_annotations)
from citescan.errors import OffsetOutOfBounds, ParseError, SampleTooLarge
from citescan.models import EntityType


# Sampling
@pytest.mark.parametrize('population,expected', [
    (4372, 353),
    (7656, 366),
    (1149, 288),
    (9026, 369),
    (11724, 372),
    (1, 1),
])
def test_sample_size(population, expected):
    assert sample_size(population) == expected


def test_sample_size_limit():
    assert sample_size(10 ** 9) == 384
    assert sample_size(100) <= 100
    sizes = [sample_size(n) for n in range(1, 2000, 37)]
    assert sizes == sorted(sizes)


def test_sample_size_settings():
    assert SampleSpec().z_score == 1.96
    assert sample_size(4372, SampleSpec(z=1.96)) == 353
    assert sample_size(4372, SampleSpec(interval=10)) < 353
    with pytest.raises(ValueError):
        sample_size(0)


def test_draw_sample():
    items = list(range(100))
    first = draw_sample(items, 10, seed=3)
    assert first == draw_sample(items, 10, seed=3)
    assert first == sorted(first)
    assert len(set(first)) == 10
    assert draw_sample(items, 100) == items
    with pytest.raises(SampleTooLarge):
        draw_sample(items, 101)


def test_draw_sample_is_uniform():
    items, runs = list(range(10)), 10_000
    inclusions = Counter(item for seed in range(runs) for item in draw_sample(items, len(items) // 2, seed=seed))
    assert sum(inclusions.values()) == runs * len(items) // 2
    sigma = math.sqrt(0.25 / runs)
    for item in items:
        assert abs(inclusions[item] / runs - 0.5) <= 3 * sigma


# Keyword groups
def test_filter_keyword():
    comments = ['Proc. of the ACM SIGPLAN', 'nothing here', 'see acm queue', 'IEEE 754 rounding']
    assert filter_keyword(comments, 'acm') == ['Proc. of the ACM SIGPLAN', 'see acm queue']


def test_group_ieee():
    comments = [
        'IEEE Trans. on Signal Processing, 1993',
        'round per IEEE 754',
        'see IEEE-802.3 framing',
        'http: standards.ieee.org',
        'IEEE Std 1003.1 behaviour',
        'IEEE 7540 is not a standard number',
    ]
    group_a, group_b = group_comments(comments, DEFAULT_GROUPS['ieee'])
    assert group_a == ['IEEE Trans. on Signal Processing, 1993', 'IEEE 7540 is not a standard number']
    assert group_b == comments[1:5]


def test_group_acm():
    comments = ['Commun. ACM 7, 1964', 'Contact: someone@acm.org']
    assert group_comments(comments, DEFAULT_GROUPS['acm']) == ([comments[0]], [comments[1]])


def test_group_without_standards():
    config = KeywordGroupConfig(keyword='springer', markers=['springer.com'])
    assert config.standard_pattern() is None
    with pytest.raises(ValueError):
        KeywordGroupConfig(keyword='ACM')


# Markup
def test_parse_markup():
    comment = parse_markup('see {author|Knuth, D.} ({year|1984})')
    assert comment.text == 'see Knuth, D. (1984)'
    assert [(s.etype, s.text_in(comment.text)) for s in comment.gold] == [
        (EntityType.AUTHOR, 'Knuth, D.'),
        (EntityType.YEAR, '1984'),
    ]
    assert not parse_markup('no entities').cites


@pytest.mark.parametrize('line', ['{author|}', '{bogus|x}', 'broken {author|x', 'stray }'])
def test_parse_markup_errors(line):
    with pytest.raises(ValueError):
        parse_markup(line)


def test_load_gold(gold):
    citing = [c for c in gold if c.cites]
    assert len(citing) >= 100
    assert len(gold) - len(citing) >= 100
    assert {s.etype for c in citing for s in c.gold} == set(EntityType)


def test_load_gold_reports_line(tmp_path):
    path = tmp_path / 'gold.txt'
    path.write_text('# header\n\n{year|1999}\n{nope|x}\n', encoding='utf-8')
    with pytest.raises(ParseError) as e:
        load_gold(path)
    assert e.value.line == 4


# Annotation files
def test_annotations_round_trip(tmp_path):
    comment = parse_markup('{author|Becker, P. J.} ({year|1974}). {title|Acta Cryst}.')
    comment.labels = {'annotator_a': 'journal'}
    path = tmp_path / 'ann' / 'gold.jsonl'
    save_annotations([comment], path)
    assert load_annotations(path) == [comment]


def test_annotation_offsets_are_checked(tmp_path):
    path = tmp_path / 'gold.jsonl'
    path.write_text('{"text": "abc", "entities": [{"start": 0, "end": 9, "type": "year"}]}\n', encoding='utf-8')
    with pytest.raises(OffsetOutOfBounds):
        load_annotations(path)


def test_annotation_bad_type(tmp_path):
    path = tmp_path / 'gold.jsonl'
    path.write_text('\n{"text": "abc", "entities": [{"start": 0, "end": 1, "type": "colour"}]}\n', encoding='utf-8')
    with pytest.raises(ParseError) as e:
        load_annotations(path)
    assert e.value.line == 2
