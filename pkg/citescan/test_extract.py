import json
import random
from pathlib import Path

import pytest

from citescan.conftest import FIXTURES
from citescan.corpus import load_repo
from citescan.errors import ParseError
from citescan.extract import (SPECIAL_CHARACTERS, CommentAccumulator, dedup, extract_comments, extract_corpus,
                              extract_file, normalize, read_comments, write_comments)
from citescan.models import Comment, Language, SourceFile

LEXER_FIXTURES = FIXTURES / 'lexers'
FIXTURE_LANGUAGES = {
    'c': Language.C,
    'cpp': Language.CPP,
    'java': Language.JAVA,
    'javascript': Language.JAVASCRIPT,
    'python': Language.PYTHON,
    'php': Language.PHP,
    'ruby': Language.RUBY,
}


def fixture_cases():
    for directory, language in FIXTURE_LANGUAGES.items():
        for expected in sorted((LEXER_FIXTURES / directory).glob('*.expected.json')):
            name = expected.name[:-len('.expected.json')]
            source = next(p for p in expected.parent.iterdir() if p.stem == name and p != expected)
            yield pytest.param(source, expected, language, id=f'{directory}/{source.name}')


@pytest.mark.parametrize('source,expected,language', list(fixture_cases()))
def test_lexer_fixtures(source: Path, expected: Path, language: Language):
    content = source.read_text(encoding='utf-8')
    comments = extract_comments(content, language)
    found = [{"line": c.start_line, "text": normalize(c.raw_text)} for c in comments if normalize(c.raw_text)]
    assert found == json.loads(expected.read_text(encoding='utf-8'))
    for comment in comments:
        assert content[comment.start:comment.end] == comment.raw_text


def test_every_language_has_fixtures():
    assert {case.values[2] for case in fixture_cases()} == set(Language)


def test_grammar_examples():
    block = extract_comments('int x; /* hi */', Language.C)
    assert [(c.raw_text, c.kind) for c in block] == [(' hi ', 'block')]
    assert extract_comments('String s = "// not a comment";', Language.JAVA) == []
    line = extract_comments('x = 1  # year 1974', Language.PYTHON)
    assert [(c.raw_text, c.kind) for c in line] == [(' year 1974', 'line')]


def test_consecutive_line_comments_stay_separate():
    comments = extract_comments('// first\n// second\n', Language.JAVASCRIPT)
    assert [(c.start_line, c.raw_text) for c in comments] == [(1, ' first'), (2, ' second')]


def test_unterminated_block_extends_to_eof(caplog):
    comments = extract_comments('int a;\n/* open\nstill open', Language.JAVA)
    assert len(comments) == 1
    assert comments[0].raw_text == ' open\nstill open'
    assert (comments[0].start_line, comments[0].end_line) == (2, 3)
    assert 'Unterminated' in caplog.text


def test_docstrings_are_not_comments():
    content = 'def f():\n    """See Knuth (1984) # not this"""\n    return 1  # but this\n'
    assert [c.raw_text for c in extract_comments(content, Language.PYTHON)] == [' but this']


def test_ruby_begin_must_start_the_line():
    content = 'x = 1\n  =begin\n=begin\nreal block\n=end\n'
    comments = extract_comments(content, Language.RUBY)
    assert [normalize(c.raw_text) for c in comments] == ['real block']


def test_php_comment_styles():
    content = '<?php\n# hash\n// slashes\n/* block */\necho "# nope";\n'
    assert [normalize(c.raw_text) for c in extract_comments(content, Language.PHP)] == ['hash', 'slashes', 'block']


def test_strings_never_hide_inside_comments():
    """Seeded fuzz: random lines of strings, code and comments against the known layout"""
    rng = random.Random(7)
    strings = ['s = "a // b";', "c = '/*';", 's = "x */ y";', 't = "\\" // q";', "u = '\\'';"]
    for round_number in range(50):
        lines, expected = [], []
        for i in range(rng.randint(1, 12)):
            kind = rng.choice(['string', 'code', 'line', 'block'])
            if kind == 'string':
                lines.append(rng.choice(strings))
            elif kind == 'code':
                lines.append(f'x{i} = {i};')
            elif kind == 'line':
                lines.append(f'// c{round_number}_{i}')
                expected.append(f'c{round_number}_{i}')
            else:
                lines.append(f'y = 1; /* b{round_number}_{i} */ z = 2;')
                expected.append(f'b{round_number}_{i}')
        content = '\n'.join(lines) + '\n'
        comments = extract_comments(content, Language.JAVA)
        assert [normalize(c.raw_text) for c in comments] == expected
        for comment in comments:
            assert content[comment.start:comment.end] == comment.raw_text


def test_normalize():
    assert normalize('A/B\n*C') == 'A B C'
    assert normalize('plain text') == 'plain text'
    assert normalize('#!/usr/bin/env  ruby \\ ') == 'usr bin env ruby'


def test_normalize_multiline_block():
    raw = ('*\n * This program is intended to be pedagogic.  Specifically, this program\n'
           ' * was the basis of the Literate Programming column which appeared in the\n'
           ' * Communications of the ACM (CACM), in the June 1989 issue (32, 6, 740-755).\n ')
    text = normalize(raw)
    assert '\n' not in text
    assert 'Communications of the ACM (CACM), in the June 1989 issue (32, 6, 740-755).' in text


def test_normalize_is_idempotent():
    rng = random.Random(3)
    alphabet = SPECIAL_CHARACTERS + ' \tabcXYZ019.,'
    for _ in range(200):
        text = ''.join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
        once = normalize(text)
        assert normalize(once) == once
        assert not any(ch in once for ch in SPECIAL_CHARACTERS)


# Deduplication
def make_comment(text: str, language: Language = Language.C, file: SourceFile = None, line: int = 1) -> Comment:
    return Comment(language=language, start_line=line, end_line=line, raw_text=text, kind='line',
                   start=0, end=len(text), file=file)


def test_dedup_across_repos(tmp_path):
    (tmp_path / 'one').mkdir()
    (tmp_path / 'two').mkdir()
    first = SourceFile(repo=load_repo(tmp_path / 'one'), rel_path='a.c', language=Language.C)
    second = SourceFile(repo=load_repo(tmp_path / 'two'), rel_path='b.c', language=Language.C)
    text = 'Knuth, D. E. (1984). Literate Programming.'
    result = dedup([(make_comment(text, file=first, line=3), text), (make_comment(text, file=second, line=9), text)])
    assert len(result) == 1
    assert result[0].occurrences == 2
    assert [(p.repo, p.path, p.line) for p in result[0].provenance] == [('one', 'a.c', 3), ('two', 'b.c', 9)]


def test_dedup_is_per_language():
    text = 'same text'
    result = dedup([(make_comment(text, Language.C), text), (make_comment(text, Language.JAVA), text)])
    assert [(c.language, c.occurrences) for c in result] == [(Language.C, 1), (Language.JAVA, 1)]


def test_dedup_typo_variants():
    """142 occurrences over 47 spelling variants stay 47 distinct comments"""
    variants = [f'Numerical Recipes in C, variant {i}' for i in range(47)]
    pairs = [(make_comment(variants[i % 47]), variants[i % 47]) for i in range(142)]
    result = dedup(pairs)
    assert len(result) == 47
    assert sum(c.occurrences for c in result) == 142


def test_dedup_sorted_output():
    texts = ['b', 'a', 'c']
    result = dedup([(make_comment(t, Language.PYTHON), t) for t in texts] + [(make_comment('z', Language.C), 'z')])
    assert [(c.language.value, c.text) for c in result] == [('C', 'z'), ('Python', 'a'), ('Python', 'b'),
                                                            ('Python', 'c')]


def test_dedup_conserves_occurrences():
    rng = random.Random(13)
    templates = [make_comment(f'comment {i}', language, line=i + 1)
                 for i in range(500) for language in (Language.C, Language.JAVA)]
    pairs = [(c, c.raw_text) for c in (rng.choice(templates) for _ in range(100_000))]
    result = dedup(pairs)
    assert sum(c.occurrences for c in result) == 100_000

    again = dedup((make_comment(c.text, c.language, line=p.line), c.text) for c in result for p in c.provenance)
    assert again == result


def test_accumulator_merge_is_associative():
    rng = random.Random(11)
    texts = [rng.choice(['x', 'y', 'z']) for _ in range(30)]
    parts = [CommentAccumulator() for _ in range(3)]
    for i, text in enumerate(texts):
        parts[i % 3].add(make_comment(text), text)
    left = parts[0].merge(parts[1]).merge(parts[2]).results()
    right = parts[0].merge(parts[1].merge(parts[2])).results()
    assert [(c.text, c.occurrences) for c in left] == [(c.text, c.occurrences) for c in right]
    assert sum(c.occurrences for c in left) == 30


# Files
def test_extract_file_drops_empty_comments(tmp_path):
    (tmp_path / 'a.c').write_text('/**/ int a; // \n/*** ***/ // kept\n', encoding='utf-8')
    source = SourceFile(repo=load_repo(tmp_path, 'r'), rel_path='a.c', language=Language.C)
    assert [text for _, text in extract_file(source)] == ['kept']


def test_extract_corpus_keeps_input_order(tmp_path):
    for name in ('b.py', 'a.py'):
        (tmp_path / name).write_text(f'# from {name}\n', encoding='utf-8')
    repo = load_repo(tmp_path, 'r')
    files = [SourceFile(repo=repo, rel_path=name, language=Language.PYTHON) for name in ('b.py', 'a.py')]
    assert [text for _, text in extract_corpus(files)] == ['from b.py', 'from a.py']


def test_comments_file_round_trip(tmp_path):
    text = 'Becker, P. J. & Coppens, P. (1974). Acta Cryst.'
    comments = dedup([(make_comment(text), text), (make_comment(text), text)])
    path = tmp_path / 'comments.jsonl'
    write_comments(comments, path)
    assert read_comments(path) == comments


def test_read_comments_reports_line(tmp_path):
    path = tmp_path / 'comments.jsonl'
    path.write_text('{"lang": "C", "text": "a", "occurrences": 1, "provenance": [{"repo": "", "path": "", "line": 1}]}\n'
                    '{"lang": "Cobol", "text": "b", "occurrences": 1, "provenance": []}\n', encoding='utf-8')
    with pytest.raises(ParseError) as e:
        read_comments(path)
    assert e.value.line == 2
