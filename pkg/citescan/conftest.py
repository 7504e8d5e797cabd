import json
from datetime import date, timedelta
from pathlib import Path

import pytest

from citescan.dataset import load_gold
from citescan.ner import default_lexicons, train

FIXTURES = Path(__file__).resolve().parent / 'data' / 'fixtures'


@pytest.fixture(scope='session')
def gold():
    return load_gold()


@pytest.fixture(scope='session')
def lexicons():
    return default_lexicons()


@pytest.fixture(scope='session')
def model(gold, lexicons):
    """Tagger trained once on the bundled gold corpus"""
    return train(gold, epochs=5, seed=42, lexicons=lexicons)


def write_commits(root: Path, per_year: dict):
    """Write a commits.jsonl sidecar with the given number of commits per year"""
    root.mkdir(parents=True, exist_ok=True)
    with open(root / 'commits.jsonl', 'w', encoding='utf-8') as f:
        for year, count in per_year.items():
            start = date(year, 1, 1)
            for i in range(count):
                f.write(json.dumps({"date": (start + timedelta(days=i % 365)).isoformat()}) + '\n')


@pytest.fixture
def corpus_dir(tmp_path):
    """Two repositories: 'active' passes the activity filter, 'quiet' does not"""
    active = tmp_path / 'active'
    write_commits(active, {2015: 300, 2016: 250})
    (active / 'src').mkdir()
    (active / 'src' / 'mt.c').write_text(
        '/* Matsumoto, M. and Nishimura, T. (1998). Mersenne twister. ACM Trans. Model. Comput. Simul. 8, 3-30. */\n'
        'int x; // plain comment\n', encoding='utf-8')
    (active / 'lib.py').write_text('# plain comment\nx = 1\n', encoding='utf-8')
    (active / 'README.md').write_text('# not source\n', encoding='utf-8')
    (active / '.git').mkdir()
    (active / '.git' / 'hook.py').write_text('# never walked\n', encoding='utf-8')

    quiet = tmp_path / 'quiet'
    write_commits(quiet, {2001: 40, 2005: 40, 2010: 40})
    (quiet / 'Main.java').write_text('// plain comment\nclass Main {}\n', encoding='utf-8')
    return tmp_path
