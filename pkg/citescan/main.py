"""
Command-line entry point for the citation detection pipeline.
One subcommand per stage; every stage reads and writes the JSONL/CSV
artifacts of the previous one, so any stage can be rerun on its own.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import ValidationError

from . import __version__
from .bibtex import write_bibtex
from .config import LOG_FILE, PipelineConfig, load_config
from .corpus import discover_repos, filter_active_repos, walk_corpus
from .dataset import (DEFAULT_GROUPS, KeywordGroupConfig, SampleSpec, draw_sample, filter_keyword, group_comments,
                      load_annotations, load_gold, sample_size)
from .detect import DetectedComment, detect, read_detections, write_detections
from .errors import CitescanError, ParseError, UsageError
from .evaluate import (TABLE_COMBOS, baseline_overlap, best_threshold, cohen_kappa, combo_label, cross_validate,
                       entity_accuracy, entity_accuracy_frame, held_out_predictions, kappa_flag, mean_entity_counts,
                       metrics_frame, sensitivity_sweep, write_csv)
from .extract import dedup, extract_corpus, read_comments, write_comments
from .models import DetectionCriterion, EntitySpan, EntityType, Language, RepoRef, SourceFile
from .ner import TaggerModel, load_lexicons, recognize_all, train
from .report import build_report, corpus_summary, iter_occurrences, search_title, write_report

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """Structured logs go to standard error, and optionally to a file"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {value!r}")
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {number}")
    return number


def positive_int(value: str) -> int:
    number = non_negative_int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def entity_types(value: str) -> frozenset:
    try:
        types = frozenset(EntityType(v.strip()) for v in value.split(',') if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    if not types:
        raise argparse.ArgumentTypeError("at least one entity type is required")
    return types


# Shared helpers
def _output(args, config: PipelineConfig, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return config.resolved_output_dir() / default_name


def _lexicon_dir(args, config: PipelineConfig) -> Optional[Path]:
    return Path(args.lexicons) if getattr(args, 'lexicons', None) else config.lexicon_dir


def _load_model(args, config: PipelineConfig) -> TaggerModel:
    path = Path(args.model) if args.model else config.model_path
    if path is None:
        raise UsageError("--model is required (or set model_path in the config file)")
    lexicon_dir = _lexicon_dir(args, config)
    return TaggerModel.load(path, load_lexicons(lexicon_dir) if lexicon_dir else None)


def _load_gold(args):
    path = Path(args.gold) if args.gold else None
    if path is not None and path.suffix == '.jsonl':
        return load_annotations(path)
    return load_gold(path)


def _criterion(args, config: PipelineConfig) -> DetectionCriterion:
    return DetectionCriterion(
        required_types=args.require if args.require else config.criterion.required_types,
        max_gap=args.max_gap if args.max_gap is not None else config.criterion.max_gap,
    )


def _read_jsonl(path: Path) -> List[dict]:
    rows = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except ValueError as e:
                raise ParseError(f"invalid JSON: {e}", path=str(path), line=lineno)
    return rows


def _write_jsonl(rows: List[dict], path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + '\n')


def _spans_to_dicts(spans: List[EntitySpan]) -> List[dict]:
    return [{"start": s.start, "end": s.end, "type": s.etype.value, "source": s.source} for s in spans]


def _tagged_comments(args, config: PipelineConfig) -> List[Tuple[Language, str, int, List[EntitySpan]]]:
    """Comments with spans: tag them unless the input already carries entities"""
    rows = _read_jsonl(Path(args.input))
    if rows and all('entities' in row for row in rows):
        try:
            return [(Language(row['lang']), row['text'], row.get('occurrences', 1),
                     [EntitySpan(etype=EntityType(e['type']), start=e['start'], end=e['end'],
                                 source=e.get('source', 'model')) for e in row['entities']])
                    for row in rows]
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"invalid tagged comment: {e}", path=args.input)

    comments = read_comments(Path(args.input))
    model = _load_model(args, config)
    jobs = args.jobs or config.jobs
    spans = recognize_all(model, [c.text for c in comments], jobs, _lexicon_dir(args, config))
    return [(c.language, c.text, c.occurrences, s) for c, s in zip(comments, spans)]


# Subcommands
def cmd_scan(args, config: PipelineConfig) -> int:
    corpus_paths = [Path(p) for p in args.corpus] if args.corpus else config.corpus_paths
    if not corpus_paths:
        raise UsageError("--corpus is required (or set corpus_paths in the config file)")
    repos = [repo for corpus_dir in corpus_paths for repo in discover_repos(corpus_dir)]
    if args.active_only:
        repos = filter_active_repos(repos)

    rows = [{"repo": f.repo.name, "root": str(f.repo.root_path), "path": f.rel_path, "lang": f.language.value}
            for f in walk_corpus(repos, config.size_cap, config.extension_overrides)]
    out = _output(args, config, 'files.jsonl')
    _write_jsonl(rows, out)
    logger.info(f"Wrote {len(rows)} source files from {len(repos)} repositories to {out}")
    return 0


def cmd_extract(args, config: PipelineConfig) -> int:
    rows = _read_jsonl(Path(args.input))
    repos = {}
    files = []
    for row in rows:
        try:
            key = (row['repo'], row['root'])
            if key not in repos:
                repos[key] = RepoRef(root_path=Path(row['root']), name=row['repo'])
            files.append(SourceFile(repo=repos[key], rel_path=row['path'], language=Language(row['lang'])))
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"invalid file record: {e}", path=args.input)

    comments = dedup(extract_corpus(files, args.jobs or config.jobs))
    write_comments(comments, _output(args, config, 'comments.jsonl'))
    print(corpus_summary(comments).to_string(index=False))
    return 0


def cmd_train(args, config: PipelineConfig) -> int:
    gold = _load_gold(args)
    lexicon_dir = _lexicon_dir(args, config)
    model = train(gold, epochs=args.epochs or config.epochs,
                  seed=args.seed if args.seed is not None else config.seed,
                  lexicons=load_lexicons(lexicon_dir) if lexicon_dir else None)
    out = Path(args.model) if args.model else (config.model_path or config.resolved_output_dir() / 'model.json')
    model.save(out)
    return 0


def cmd_tag(args, config: PipelineConfig) -> int:
    tagged = _tagged_comments(args, config)
    rows = [{"lang": lang.value, "text": text, "occurrences": occurrences, "entities": _spans_to_dicts(spans)}
            for lang, text, occurrences, spans in tagged]
    out = _output(args, config, 'tagged.jsonl')
    _write_jsonl(rows, out)
    logger.info(f"Wrote {len(rows)} tagged comments to {out}")
    return 0


def cmd_detect(args, config: PipelineConfig) -> int:
    criterion = _criterion(args, config)
    detections = []
    for lang, text, _, spans in _tagged_comments(args, config):
        result = detect(text, spans, criterion)
        if result.detected:
            detections.append(DetectedComment(lang=lang, text=text, largest_gap=result.largest_gap,
                                              records=result.records))
    write_detections(detections, _output(args, config, 'detections.jsonl'))
    if args.bibtex:
        write_bibtex([record for d in detections for record in d.records], Path(args.bibtex))
    return 0


def cmd_evaluate(args, config: PipelineConfig) -> int:
    gold = _load_gold(args)
    folds = args.folds or config.folds
    seed = args.seed if args.seed is not None else config.seed
    max_gap = args.max_gap if args.max_gap is not None else config.criterion.max_gap
    predictions = held_out_predictions(gold, folds, seed, args.epochs or config.epochs,
                                       args.jobs or config.jobs, _lexicon_dir(args, config))

    results = cross_validate(gold, folds, seed, TABLE_COMBOS, max_gap, predictions=predictions)
    out_dir = Path(args.out) if args.out else config.resolved_output_dir()
    frame = metrics_frame([(combo_label(combo), max_gap, m) for combo, m in results.items()])
    write_csv(frame, out_dir / 'cross_validation.csv')
    write_csv(entity_accuracy_frame(entity_accuracy(gold, predictions)), out_dir / 'entity_accuracy.csv')
    print(frame.to_string(index=False))

    cite_mean, other_mean = mean_entity_counts(gold, predictions)
    print(f"mean identified entities: citing {cite_mean:.1f}, other {other_mean:.1f}")

    detected = [detect(c.text, s, DetectionCriterion(max_gap=max_gap)).detected for c, s in zip(gold, predictions)]
    print(f"baseline overlap: {baseline_overlap([c.text for c in gold], detected):.2f}")

    if args.labels:
        labelled = load_annotations(Path(args.labels))
        kappa = cohen_kappa([c.labels.get(args.a, '') for c in labelled], [c.labels.get(args.b, '') for c in labelled])
        flagged = kappa_flag(kappa)
        print(f"kappa: {kappa:.3f}{' (FLAGGED: agreement <= 0.75)' if flagged else ''}")
        if flagged:
            logger.warning(f"Inter-annotator agreement {kappa:.3f} is not above 0.75")
    return 0


def cmd_sweep(args, config: PipelineConfig) -> int:
    gold = _load_gold(args)
    combo = args.require or config.criterion.required_types
    if args.model or config.model_path:
        model = _load_model(args, config)
    else:
        lexicon_dir = _lexicon_dir(args, config)
        model = train(gold, epochs=args.epochs or config.epochs,
                      seed=args.seed if args.seed is not None else config.seed,
                      lexicons=load_lexicons(lexicon_dir) if lexicon_dir else None)
    if args.d_max < args.d_min:
        raise UsageError("--d-max must be >= --d-min")

    curve = sensitivity_sweep(gold, model, combo, range(args.d_min, args.d_max + 1))
    frame = metrics_frame([(combo_label(combo), d, m) for d, m in curve])
    write_csv(frame, _output(args, config, 'sweep.csv'))
    print(frame.to_string(index=False))
    print(f"best D: {best_threshold(curve)}")
    return 0


def cmd_sample(args, config: PipelineConfig) -> int:
    spec = SampleSpec(confidence=args.confidence, interval=args.interval)
    if args.population is not None:
        print(sample_size(args.population, spec))
        return 0
    if not args.input:
        raise UsageError("either --population or --in is required")

    comments = read_comments(Path(args.input))
    seed = args.seed if args.seed is not None else config.seed
    if args.keyword:
        keyword = args.keyword.lower()
        group = config.groups.get(keyword) or DEFAULT_GROUPS.get(keyword) or KeywordGroupConfig(keyword=keyword)
        group_a, group_b = group_comments(filter_keyword(comments, keyword), group)
        populations = {'A': group_a, 'B': group_b}
    else:
        populations = {'all': comments}

    out_dir = Path(args.out) if args.out else config.resolved_output_dir()
    for name, population in populations.items():
        if not population:
            logger.warning(f"Group {name} is empty; nothing to sample")
            continue
        n = sample_size(len(population), spec)
        sample = draw_sample(population, n, seed)
        suffix = f"{args.keyword.lower()}_{name}" if args.keyword else name
        write_comments(sample, out_dir / f'sample_{suffix}.jsonl')
        print(f"{suffix}: population {len(population)}, sample {n}")
    return 0


def cmd_report(args, config: PipelineConfig) -> int:
    detections = read_detections(Path(args.input))
    tables = build_report(detections, args.min_count or config.min_count)
    if args.comments:
        tables['corpus'] = corpus_summary(read_comments(Path(args.comments)))
    write_report(tables, Path(args.out) if args.out else config.resolved_output_dir(), args.format)
    return 0


def cmd_search(args, config: PipelineConfig) -> int:
    result = search_title(iter_occurrences(read_comments(Path(args.input))), args.query)
    print(f"total matches: {result.total_matches}")
    print(f"distinct matches: {result.distinct_matches}")
    for variant in result.variants:
        print(f"  {variant}")
    return 0


def cmd_kappa(args, config: PipelineConfig) -> int:
    labelled = load_annotations(Path(args.input))
    pairs = [(c.labels[args.a], c.labels[args.b]) for c in labelled if args.a in c.labels and args.b in c.labels]
    if not pairs:
        raise CitescanError(f"no comment carries both labels '{args.a}' and '{args.b}'")
    kappa = cohen_kappa([a for a, _ in pairs], [b for _, b in pairs])
    print(f"kappa: {kappa:.3f} over {len(pairs)} comments")
    if kappa_flag(kappa):
        print("FLAGGED: agreement <= 0.75")
    return 0


# Parser
def build_parser() -> CliParser:
    parser = CliParser(prog='citescan', description='Detect publication citations in source code comments')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')

    common = CliParser(add_help=False)
    common.add_argument('--config', help='TOML or JSON config file')
    common.add_argument('--log-level', help='logging level (default from CITESCAN_LOG_LEVEL or INFO)')
    common.add_argument('--log-file', help='also write logs to this file')
    common.add_argument('--out', help='output file or directory')
    common.add_argument('--seed', type=int, help='random seed (default 42)')
    common.add_argument('--jobs', type=positive_int, help='worker processes')

    subparsers = parser.add_subparsers(dest='command', required=True, metavar='command')

    def add(name, handler, help_text):
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    sub = add('scan', cmd_scan, 'List classifiable source files of a corpus')
    sub.add_argument('--corpus', action='append', help='corpus directory; each subdirectory is a repository')
    sub.add_argument('--active-only', action='store_true', help='keep only active repositories (commits.jsonl)')

    sub = add('extract', cmd_extract, 'Extract, normalize and deduplicate comments')
    sub.add_argument('--in', dest='input', required=True, help='file list from scan')

    sub = add('train', cmd_train, 'Train the entity tagger')
    sub.add_argument('--gold', help='gold corpus (markup .txt or annotation .jsonl; default: bundled)')
    sub.add_argument('--model', help='model file to write')
    sub.add_argument('--epochs', type=positive_int, help='training passes over the gold corpus (default 5)')
    sub.add_argument('--lexicons', help='lexicon directory')

    for name, handler, help_text in (('tag', cmd_tag, 'Tag entity spans in comments'),
                                     ('detect', cmd_detect, 'Detect citations in comments')):
        sub = add(name, handler, help_text)
        sub.add_argument('--in', dest='input', required=True, help='comments or tagged comments (JSONL)')
        sub.add_argument('--model', help='tagger model file')
        sub.add_argument('--lexicons', help='lexicon directory')
        if name == 'detect':
            sub.add_argument('--max-gap', type=non_negative_int, help='largest allowed gap in characters')
            sub.add_argument('--require', type=entity_types, help='comma-separated required entity types')
            sub.add_argument('--bibtex', help='also write detected records as BibTeX')

    sub = add('evaluate', cmd_evaluate, 'Cross-validate detection on the gold corpus')
    sub.add_argument('--gold', help='gold corpus (default: bundled)')
    sub.add_argument('--folds', type=positive_int, help='cross-validation folds (default 10)')
    sub.add_argument('--epochs', type=positive_int, help='training passes per fold (default 5)')
    sub.add_argument('--max-gap', type=non_negative_int, help='largest allowed gap in characters')
    sub.add_argument('--lexicons', help='lexicon directory')
    sub.add_argument('--labels', help='dual-annotated label file for the agreement check')
    sub.add_argument('--a', default='annotator_a', help='first annotator label key')
    sub.add_argument('--b', default='annotator_b', help='second annotator label key')

    sub = add('sweep', cmd_sweep, 'Sweep the distance threshold')
    sub.add_argument('--gold', help='gold corpus (default: bundled)')
    sub.add_argument('--model', help='tagger model (default: train on the gold corpus)')
    sub.add_argument('--epochs', type=positive_int, help='training passes when no model is given (default 5)')
    sub.add_argument('--lexicons', help='lexicon directory')
    sub.add_argument('--require', type=entity_types, help='comma-separated required entity types')
    sub.add_argument('--d-min', type=non_negative_int, default=0, help='smallest distance threshold (default 0)')
    sub.add_argument('--d-max', type=non_negative_int, default=20, help='largest distance threshold (default 20)')

    sub = add('sample', cmd_sample, 'Compute sample sizes and draw samples')
    sub.add_argument('--population', type=positive_int, help='print the sample size for this population')
    sub.add_argument('--in', dest='input', help='comments to sample from')
    sub.add_argument('--keyword', help='filter by keyword and split into groups A and B')
    sub.add_argument('--confidence', type=float, default=0.95, help='confidence level (default 0.95)')
    sub.add_argument('--interval', type=float, default=5, help='confidence interval in percentage points (default 5)')

    sub = add('report', cmd_report, 'Aggregate detections into report tables')
    sub.add_argument('--in', dest='input', required=True, help='detections (JSONL)')
    sub.add_argument('--comments', help='comments (JSONL) for the corpus summary')
    sub.add_argument('--format', choices=['csv', 'md', 'json'], default='md', help='report format (default md)')
    sub.add_argument('--min-count', type=positive_int, help='smallest count in the top-titles table (default 20)')

    sub = add('search', cmd_search, 'Search a title across all comment occurrences')
    sub.add_argument('--in', dest='input', required=True, help='comments (JSONL)')
    sub.add_argument('--query', required=True, help='title to search for, case-insensitive')

    sub = add('kappa', cmd_kappa, "Cohen's kappa between two annotators")
    sub.add_argument('--in', dest='input', required=True, help='annotations with labels (JSONL)')
    sub.add_argument('--a', default='annotator_a', help='first annotator label key')
    sub.add_argument('--b', default='annotator_b', help='second annotator label key')

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; 0 on success, 1 on usage errors, 2 on data errors"""
    try:
        args = build_parser().parse_args(argv)
        config = load_config(Path(args.config) if args.config else None)
        configure_logging(args.log_level or config.log_level, args.log_file or LOG_FILE)
        return args.handler(args, config)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except CitescanError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (ValidationError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
