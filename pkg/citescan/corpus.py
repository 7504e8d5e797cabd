"""
Corpus ingestion: repositories on disk, language classification,
the active-repository filter and the deterministic file walk.
"""

import json
import logging
import os
from collections import Counter
from datetime import date
from pathlib import Path, PurePosixPath
from typing import Dict, Iterator, List, Optional

from .errors import EmptyCorpus, ParseError
from .models import Language, RepoRef, SourceFile

logger = logging.getLogger(__name__)

EXTENSION_TABLE: Dict[str, Language] = {
    '.c': Language.C,
    '.h': Language.C,
    '.cpp': Language.CPP,
    '.cc': Language.CPP,
    '.cxx': Language.CPP,
    '.hpp': Language.CPP,
    '.hh': Language.CPP,
    '.hxx': Language.CPP,
    '.java': Language.JAVA,
    '.js': Language.JAVASCRIPT,
    '.py': Language.PYTHON,
    '.php': Language.PHP,
    '.rb': Language.RUBY,
}

COMMITS_FILE = 'commits.jsonl'
DEFAULT_SIZE_CAP = 4 * 1024 * 1024
MIN_COMMITS = 500  # strictly more than this
MIN_ACTIVE_COMMITS = 100  # at least this many in the best two-year window
VCS_DIRS = {'.git', '.hg', '.svn'}


def classify_language(rel_path: str, overrides: Optional[Dict[str, Language]] = None) -> Optional[Language]:
    """Detect the programming language of a file from its extension"""
    suffix = PurePosixPath(rel_path).suffix.lower()
    if not suffix:
        return None
    if overrides:
        lowered = {ext.lower(): lang for ext, lang in overrides.items()}
        if suffix in lowered:
            return lowered[suffix]
    return EXTENSION_TABLE.get(suffix)


def load_commit_dates(root: Path) -> Optional[List[date]]:
    """Read commits.jsonl from a repository root, if present"""
    sidecar = root / COMMITS_FILE
    if not sidecar.exists():
        return None

    dates = []
    with open(sidecar, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                dates.append(date.fromisoformat(json.loads(line)['date']))
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"invalid commit record: {e}", path=str(sidecar), line=lineno)
    return dates


def load_repo(root: Path, name: Optional[str] = None) -> RepoRef:
    root = Path(root)
    dates = load_commit_dates(root)
    return RepoRef(
        root_path=root,
        name=name or root.resolve().name,
        commit_dates=tuple(dates) if dates is not None else None,
    )


def discover_repos(corpus_dir: Path) -> List[RepoRef]:
    """Every immediate subdirectory of a corpus directory is one repository"""
    corpus_dir = Path(corpus_dir)
    repos = [
        load_repo(child, child.name)
        for child in sorted(corpus_dir.iterdir(), key=lambda p: p.name.encode('utf-8', 'surrogateescape'))
        if child.is_dir() and not child.is_symlink() and child.name not in VCS_DIRS
    ]
    logger.info(f"Discovered {len(repos)} repositories under {corpus_dir}")
    return repos


def best_two_year_window(dates: List[date]) -> int:
    """Largest number of commits falling in two consecutive calendar years"""
    per_year = Counter(d.year for d in dates)
    return max((per_year[y] + per_year[y + 1] for y in per_year), default=0)


def is_active(repo: RepoRef) -> bool:
    dates = list(repo.commit_dates or ())
    return len(dates) > MIN_COMMITS and best_two_year_window(dates) >= MIN_ACTIVE_COMMITS


def filter_active_repos(repos: List[RepoRef]) -> List[RepoRef]:
    """Keep repositories with more than 500 commits and at least 100 in their most active two years"""
    if not repos:
        raise EmptyCorpus("no repositories to filter")

    kept = []
    for repo in repos:
        if repo.commit_dates is None:
            logger.warning(f"Rejected {repo.name}: no commit metadata ({COMMITS_FILE})")
            continue
        if is_active(repo):
            kept.append(repo)
        else:
            logger.info(f"Rejected {repo.name}: {len(repo.commit_dates)} commits, "
                        f"best two-year window {best_two_year_window(list(repo.commit_dates))}")

    logger.info(f"Kept {len(kept)} of {len(repos)} repositories as active")
    return kept


def _byte_key(text: str) -> bytes:
    return text.encode('utf-8', 'surrogateescape')


def walk_corpus(repos: List[RepoRef], size_cap: int = DEFAULT_SIZE_CAP,
                overrides: Optional[Dict[str, Language]] = None) -> Iterator[SourceFile]:
    """Yield every classifiable file, repos by name then files by path"""
    if not repos:
        raise EmptyCorpus("no repositories to walk")

    for repo in sorted(repos, key=lambda r: _byte_key(r.name)):
        candidates = []
        for dirpath, dirnames, filenames in os.walk(repo.root_path, onerror=_log_walk_error):
            dirnames[:] = [d for d in dirnames if d not in VCS_DIRS]
            for filename in filenames:
                full = Path(dirpath) / filename
                rel_path = full.relative_to(repo.root_path).as_posix()
                language = classify_language(rel_path, overrides)
                if language is None:
                    continue
                try:
                    if full.is_symlink():
                        continue
                    size = full.stat().st_size
                except OSError as e:
                    logger.warning(f"Skipping unreadable file {repo.name}/{rel_path}: {e}")
                    continue
                if size > size_cap:
                    logger.info(f"Skipping {repo.name}/{rel_path}: {size} bytes exceeds size cap")
                    continue
                candidates.append((rel_path, language))

        for rel_path, language in sorted(candidates, key=lambda c: _byte_key(c[0])):
            yield SourceFile(repo=repo, rel_path=rel_path, language=language)


def _log_walk_error(error: OSError):
    logger.warning(f"Skipping unreadable directory: {error}")


def read_source(source: SourceFile, size_cap: int = DEFAULT_SIZE_CAP) -> Optional[str]:
    """Read a source file with lossy UTF-8 decoding; None when unreadable or over the size cap"""
    path = source.repo.root_path / source.rel_path
    try:
        with open(path, 'rb') as f:
            data = f.read(size_cap + 1)
    except OSError as e:
        logger.warning(f"Error reading {source.repo.name}/{source.rel_path}: {e}")
        return None
    if len(data) > size_cap:
        logger.info(f"Skipping {source.repo.name}/{source.rel_path}: exceeds size cap of {size_cap} bytes")
        return None
    return data.decode('utf-8', errors='replace')
