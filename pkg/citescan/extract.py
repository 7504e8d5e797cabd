"""
Comment extraction, normalization and per-language deduplication.
Produces the distinct-comment corpus the tagging stages consume.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from .corpus import read_source
from .errors import ParseError
from .lexers import scan_comments
from .models import Comment, Language, NormalizedComment, Provenance, SourceFile
from .parallel import ordered_map

logger = logging.getLogger(__name__)

# Stripped during preprocessing, each replaced by one space
SPECIAL_CHARACTERS = '\n/*\\#!'
_SPECIAL_TABLE = str.maketrans({ch: ' ' for ch in SPECIAL_CHARACTERS})


def extract_comments(content: str, language: Language, file: Optional[SourceFile] = None) -> List[Comment]:
    """Extract all line and block comments of a source text"""
    return scan_comments(content, language, file)


def normalize(raw_text: str) -> str:
    """Replace special characters by spaces and collapse whitespace"""
    return " ".join(raw_text.translate(_SPECIAL_TABLE).split())


def extract_file(source: SourceFile) -> List[Tuple[Comment, str]]:
    """Extract (comment, normalized text) pairs from one file; empty normalized texts are dropped"""
    content = read_source(source)
    if content is None:
        return []
    try:
        comments = extract_comments(content, source.language, source)
    except Exception as e:
        logger.error(f"Error extracting comments from {source.repo.name}/{source.rel_path}: {e}")
        return []

    pairs = []
    for comment in comments:
        text = normalize(comment.raw_text)
        if text:
            pairs.append((comment, text))
    return pairs


def extract_corpus(files: Iterable[SourceFile], jobs: int = 1) -> List[Tuple[Comment, str]]:
    """Extract every file, in input order"""
    files = list(files)
    pairs = []
    for per_file in ordered_map(extract_file, files, jobs):
        pairs.extend(per_file)
    logger.info(f"Extracted {len(pairs)} comments from {len(files)} files")
    return pairs


class CommentAccumulator:
    """Mergeable fold grouping comments by (language, normalized text)"""

    def __init__(self):
        self.groups: Dict[Tuple[Language, str], List[Provenance]] = {}

    def add(self, comment: Comment, text: str):
        if comment.file is not None:
            provenance = Provenance(repo=comment.file.repo.name, path=comment.file.rel_path,
                                    line=comment.start_line)
        else:
            provenance = Provenance(repo='', path='', line=comment.start_line)
        self.groups.setdefault((comment.language, text), []).append(provenance)

    def merge(self, other: 'CommentAccumulator') -> 'CommentAccumulator':
        merged = CommentAccumulator()
        for source in (self, other):
            for key, provenance in source.groups.items():
                merged.groups.setdefault(key, []).extend(provenance)
        return merged

    def results(self) -> List[NormalizedComment]:
        return [
            NormalizedComment(text=text, occurrences=len(provenance), language=language, provenance=provenance)
            for (language, text), provenance in sorted(self.groups.items(), key=lambda kv: (kv[0][0].value, kv[0][1]))
        ]


def dedup(pairs: Iterable[Tuple[Comment, str]]) -> List[NormalizedComment]:
    """Collapse identical normalized comments per language"""
    accumulator = CommentAccumulator()
    total = 0
    for comment, text in pairs:
        accumulator.add(comment, text)
        total += 1
    results = accumulator.results()
    logger.info(f"Deduplicated {total} comments into {len(results)} distinct comments")
    return results


# Persistence
def comment_to_dict(comment: NormalizedComment) -> dict:
    return {
        "lang": comment.language.value,
        "text": comment.text,
        "occurrences": comment.occurrences,
        "provenance": [{"repo": p.repo, "path": p.path, "line": p.line} for p in comment.provenance],
    }


def write_comments(comments: List[NormalizedComment], path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for comment in comments:
            f.write(json.dumps(comment_to_dict(comment), ensure_ascii=False) + '\n')
    logger.info(f"Wrote {len(comments)} comments to {path}")


def read_comments(path: Path) -> List[NormalizedComment]:
    comments = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                comments.append(NormalizedComment(
                    text=data['text'],
                    occurrences=data['occurrences'],
                    language=Language(data['lang']),
                    provenance=[Provenance(**p) for p in data['provenance']],
                ))
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"invalid comment record: {e}", path=str(path), line=lineno)
    logger.info(f"Loaded {len(comments)} comments from {path}")
    return comments
