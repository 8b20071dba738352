"""Command-line harness: extraction, attacks, training, LIME subsets and the experiment grid.

Usage:
  python main.py synth --profile tiered --out output/synthetic
  python main.py grid --config data/experiment.json
  python main.py report --grid-dir output/grid

Exit status: 0 success, 1 usage error, 2 data error (or skipped files),
3 grid finished with failed cells.
"""
import argparse
import glob
import hashlib
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from classifiers import Algorithm, evaluate, random_search_cv, train
from config import (
    EXPERIMENT_FILE,
    LIME_SAMPLES,
    LOG_FILE,
    LOG_LEVEL,
    OUTPUT_DIR,
    QUALITY_FACTORS,
    SEARCH_SPACES,
    SEARCH_TRIALS,
    SEED,
    SYNTH_IMAGE_SIZE,
    SYNTH_PER_CLASS,
    TRAIN_FRACTION,
    WORKERS,
)
from database import (
    load_contributions,
    load_features,
    load_json,
    load_manifest,
    load_model,
    read_header,
    read_rows,
    save_contributions,
    save_features,
    save_json,
    save_manifest,
    save_model,
    save_subset,
    write_rows,
)
from datasets import (
    PROFILE_PRESETS,
    ClassLabel,
    FeatureTable,
    ManifestRow,
    extract_table,
    synth_generate,
    undersample,
)
from errors import ConfigError, DataError, ForensicsError, MissingClassError, SubsetError
from features import average_beta_by_class
from jpeg_attack import attack_dataset
from lime_explainer import abs_lime, average_contributions, pos_lime
from plots import plot_avg_beta_by_class, plot_beta_vs_qf, plot_lime_contributions
from subsets import LIME_TOKENS, TABLE2_SUBSETS, all_coefficients, manual_families, parse_subset

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3

RAW = 'RAW'
DEFAULT_ALGORITHMS = ('knn', 'random_forest', 'gradient_boosting')
REPORT_HEADER = ['subset', 'algorithm', 'condition', 'accuracy', 'f1_macro', 'n_test']
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def setup_logging(level: str = LOG_LEVEL, log_file: Optional[str] = LOG_FILE):
    """Configure the root logger once: stderr plus an optional appending log file."""
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, 'betaforensics', False)]:
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level.upper() if isinstance(level, str) else level)
    formatter = logging.Formatter(LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    stream.betaforensics = True
    root.addHandler(stream)
    if log_file:
        try:
            os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
            file_handler = logging.FileHandler(log_file, mode='a')
        except OSError as e:
            logger.warning("Cannot open log file %s: %s", log_file, e)
        else:
            file_handler.setFormatter(formatter)
            file_handler.betaforensics = True
            root.addHandler(file_handler)


def condition_name(qf: Optional[int]) -> str:
    return RAW if qf is None else f"QF{qf}"


@dataclass
class ExperimentConfig:
    manifest: str
    subsets: List[str] = field(default_factory=lambda: list(TABLE2_SUBSETS))
    algorithms: List[str] = field(default_factory=lambda: list(DEFAULT_ALGORITHMS))
    qfs: List[int] = field(default_factory=lambda: list(QUALITY_FACTORS))
    seed: int = SEED
    n_trials: int = SEARCH_TRIALS
    out_dir: str = os.path.join(OUTPUT_DIR, 'grid')
    workers: int = WORKERS
    lime_samples: int = LIME_SAMPLES
    search_spaces: Dict[str, dict] = field(default_factory=dict)
    reuse_cache: bool = False
    undersample: bool = True

    def __post_init__(self):
        if not self.subsets or not self.algorithms:
            raise ConfigError("experiment needs at least one subset and one algorithm")
        try:
            self.algorithms = [Algorithm.parse(a).value for a in self.algorithms]
            self.search_spaces = {Algorithm.parse(k).value: v for k, v in self.search_spaces.items()}
        except DataError as e:
            raise ConfigError(str(e)) from e
        bad = [q for q in self.qfs if isinstance(q, bool) or int(q) != q or not 1 <= q <= 100]
        if bad:
            raise ConfigError(f"quality factors must be integers in [1, 100], got {bad}")
        self.qfs = [int(q) for q in self.qfs]
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be at least 1, got {self.n_trials}")

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown experiment keys: {', '.join(unknown)}")
        if 'manifest' not in data:
            raise ConfigError("experiment config needs a 'manifest' entry")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def load(cls, path: str) -> 'ExperimentConfig':
        return cls.from_dict(load_json(path))

    def search_space(self, algorithm: str) -> dict:
        return self.search_spaces.get(algorithm, SEARCH_SPACES[algorithm])


@dataclass
class ReportRow:
    subset: str
    algorithm: str
    condition: str
    accuracy: float
    f1_macro: float
    n_test: int


def save_report(path, rows: Sequence[ReportRow]):
    write_rows(path, REPORT_HEADER, [[r.subset, r.algorithm, r.condition, repr(float(r.accuracy)),
                                      repr(float(r.f1_macro)), r.n_test] for r in rows])


def load_report(path) -> List[ReportRow]:
    try:
        return [ReportRow(s, a, c, float(acc), float(f1), int(n))
                for s, a, c, acc, f1, n in read_rows(path, REPORT_HEADER)]
    except ValueError as e:
        raise DataError(f"{path}: {e}") from e


@dataclass
class GridResult:
    rows: List[ReportRow]
    failures: List[Tuple[str, str, str]] = field(default_factory=list)
    skipped_files: List[str] = field(default_factory=list)
    contributions: Optional[object] = None
    class_curves: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)
    avg_beta: Optional[np.ndarray] = None

    @property
    def partial(self) -> bool:
        return bool(self.failures)


# Extraction
# ----------

def extract_cmd(manifest: str, out: str, workers: int = WORKERS, split: Optional[str] = None):
    """Feature cache for every manifest row (optionally one split); returns (table, skipped paths)."""
    rows = load_manifest(manifest)
    if split is not None:
        rows = [r for r in rows if r.split == split]
    table, failures = extract_table(rows, workers=workers, base_dir=os.path.dirname(os.path.abspath(manifest)))
    save_features(out, table)
    logger.info("Extracted %d of %d images to %s", len(table), len(rows), out)
    if failures:
        logger.warning("%d image(s) skipped: %s", len(failures), ', '.join(failures))
    return table, failures


def class_curves(raw_test: FeatureTable, attacked: Dict[int, FeatureTable]) -> Dict[str, Dict[str, np.ndarray]]:
    """Class-average beta per test condition, keyed by class tag then condition name."""
    tables = [(RAW, raw_test)] + [(condition_name(qf), t) for qf, t in attacked.items()]
    curves = {cls.tag: {} for cls in ClassLabel}
    for condition, table in tables:
        try:
            avg = average_beta_by_class(zip(table.x, table.labels))
        except MissingClassError as e:
            logger.warning("No %s curve: %s", condition, e)
            continue
        for cls in ClassLabel:
            curves[cls.tag][condition] = avg[cls]
    return curves


def dataset_fingerprint(manifest_path: str, rows: Sequence[ManifestRow], base_dir: str) -> str:
    """Hash of the manifest bytes plus the size and mtime of every image it names."""
    digest = hashlib.sha256()
    with open(manifest_path, 'rb') as f:
        digest.update(f.read())
    for row in rows:
        try:
            st = os.stat(os.path.join(base_dir, row.path))
            digest.update(f"{row.path}\t{st.st_size}\t{st.st_mtime_ns}\n".encode('utf-8'))
        except OSError:
            digest.update(f"{row.path}\tmissing\n".encode('utf-8'))
    return digest.hexdigest()


def _stored_fingerprint(key_path):
    if not os.path.exists(key_path):
        return None
    try:
        return load_json(key_path).get('fingerprint')
    except DataError:
        return None


def _cached_table(path, reuse, build, fingerprint):
    """Load the cache at ``path`` when it was built from the same dataset, else build and save it."""
    key_path = os.path.splitext(path)[0] + '.key.json'
    if reuse and os.path.exists(path):
        if _stored_fingerprint(key_path) == fingerprint:
            logger.info("Reusing feature cache %s", path)
            return load_features(path), []
        logger.warning("Feature cache %s was built from other data; rebuilding", path)
    table, failures = build()
    save_features(path, table)
    save_json(key_path, {'fingerprint': fingerprint})
    return table, failures


# Grid
# ----

def _run_cell(args):
    subset, algorithm, train_table, tests, search_space, n_trials, seed = args
    try:
        if search_space:
            params = random_search_cv(algorithm, train_table, subset, search_space, n_trials, seed).best
        else:
            params = {}
        model = train(algorithm, train_table, subset, params, seed)
        rows = []
        for condition, test in tests:
            metrics = evaluate(model, test)
            rows.append(ReportRow(subset.name, algorithm, condition, metrics.accuracy,
                                  metrics.f1_macro, metrics.n_test))
        return rows, None
    except ForensicsError as e:
        return [], f"{type(e).__name__}: {e}"


def lime_subsets(train_table, raw_test, config: ExperimentConfig):
    """Train the full-spectrum MLP, average its LIME contributions and derive both subsets."""
    model = train(Algorithm.MLP, train_table, all_coefficients(), {}, config.seed)
    contributions = average_contributions(model, raw_test, config.lime_samples, config.seed, config.workers)
    return contributions, {'pos-lime': pos_lime(contributions), 'abs-lime': abs_lime(contributions)}


def run_grid(config: ExperimentConfig) -> GridResult:
    """Train on RAW under-sampled features, test on RAW and every QF-attacked test set."""
    os.makedirs(config.out_dir, exist_ok=True)
    manifest = load_manifest(config.manifest)
    base_dir = os.path.dirname(os.path.abspath(config.manifest))
    train_ids = [r.path for r in manifest if r.split == 'train']
    test_ids = [r.path for r in manifest if r.split == 'test']
    if not train_ids or not test_ids:
        raise DataError("manifest needs both train and test rows")

    fingerprint = dataset_fingerprint(config.manifest, manifest, base_dir)
    raw, skipped = _cached_table(
        os.path.join(config.out_dir, 'features_raw.csv'), config.reuse_cache,
        lambda: extract_table(manifest, workers=config.workers, base_dir=base_dir), fingerprint)
    attacked = {}
    for qf in config.qfs:
        def attack(qf=qf):
            result = attack_dataset(manifest, qf, workers=config.workers, base_dir=base_dir)
            return result.table, result.failures
        attacked[qf], failed = _cached_table(
            os.path.join(config.out_dir, f'features_qf{qf:02d}.csv'), config.reuse_cache, attack, fingerprint)
        skipped.extend(f for f in failed if f not in skipped)

    train_table = raw.select_ids(train_ids)
    raw_test = raw.select_ids(test_ids)
    if config.undersample:
        train_table = undersample(train_table, config.seed)
    tests = [(RAW, raw_test)] + [(condition_name(qf), attacked[qf]) for qf in config.qfs]

    result = GridResult(rows=[], skipped_files=skipped)
    result.avg_beta = average_beta_by_class(zip(raw.x, raw.labels))
    result.class_curves = class_curves(raw_test, attacked)

    lime_sets = {}
    lime_error = None
    if any(s.strip().lower() in LIME_TOKENS for s in config.subsets):
        try:
            result.contributions, lime_sets = lime_subsets(train_table, raw_test, config)
            save_contributions(os.path.join(config.out_dir, 'contributions.csv'), result.contributions)
            save_subset(os.path.join(config.out_dir, 'pos_lime.txt'), lime_sets['pos-lime'])
            save_subset(os.path.join(config.out_dir, 'abs_lime.txt'), lime_sets['abs-lime'])
        except ForensicsError as e:
            lime_error = f"{type(e).__name__}: {e}"
            logger.warning("LIME subsets unavailable: %s", lime_error)

    cells = []
    for token in config.subsets:
        key = token.strip().lower()
        if key in LIME_TOKENS and key not in lime_sets:
            for algorithm in config.algorithms:
                result.failures.append((key.upper(), algorithm, lime_error or 'LIME subset unavailable'))
            continue
        subset = lime_sets[key] if key in LIME_TOKENS else parse_subset(token)
        for algorithm in config.algorithms:
            cells.append((subset, algorithm, train_table, tests,
                          config.search_space(algorithm), config.n_trials, config.seed))

    if config.workers <= 1 or len(cells) < 2:
        outcomes = [_run_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_cell, cells))
    for cell, (rows, error) in zip(cells, outcomes):
        if error is None:
            result.rows.extend(rows)
            logger.info("Cell %s / %s done (RAW accuracy %.4f)", cell[0].name, cell[1], rows[0].accuracy)
        else:
            result.failures.append((cell[0].name, cell[1], error))
            logger.warning("Cell %s / %s failed: %s", cell[0].name, cell[1], error)
    return result


def emit_report(rows: Sequence[ReportRow], out_dir: str, class_curves=None, contributions=None,
                avg_beta=None) -> List[str]:
    """Write report.csv and whichever figures the given data supports; returns the paths."""
    if not rows:
        raise DataError("no report rows to emit")
    paths = [os.path.join(out_dir, 'report.csv')]
    save_report(paths[0], rows)
    if avg_beta is not None:
        paths.append(plot_avg_beta_by_class(avg_beta, os.path.join(out_dir, 'avg_beta_by_class.svg')))
    if contributions is not None:
        paths.append(plot_lime_contributions(contributions, os.path.join(out_dir, 'lime_contributions.svg')))
    for tag, curves in (class_curves or {}).items():
        if curves:
            paths.append(plot_beta_vs_qf(curves, tag, os.path.join(out_dir, f'beta_vs_qf_{tag}.svg')))
    return paths


def report_from_dir(grid_dir: str) -> List[str]:
    """Re-emit report.csv and the figures of a finished grid directory."""
    rows = load_report(os.path.join(grid_dir, 'report.csv'))
    raw_path = os.path.join(grid_dir, 'features_raw.csv')
    avg_beta, curves = None, None
    if os.path.exists(raw_path):
        raw = load_features(raw_path)
        avg_beta = average_beta_by_class(zip(raw.x, raw.labels))
        attacked = {}
        for path in sorted(glob.glob(os.path.join(grid_dir, 'features_qf*.csv'))):
            match = re.search(r'features_qf(\d+)\.csv$', path)
            attacked[int(match.group(1))] = load_features(path)
        attacked = dict(sorted(attacked.items(), reverse=True))
        raw_test = raw
        if attacked:
            raw_test = raw.select_ids(next(iter(attacked.values())).ids)
        curves = class_curves(raw_test, attacked)
    contributions_path = os.path.join(grid_dir, 'contributions.csv')
    contributions = load_contributions(contributions_path) if os.path.exists(contributions_path) else None
    return emit_report(rows, grid_dir, curves, contributions, avg_beta)


# CLI
# ---

class CliParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage status instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _print_subset(subset):
    print(f"{subset.name}\t{len(subset)}\t{','.join(str(i) for i in subset.indices)}")


def cmd_extract(args):
    _, failures = extract_cmd(args.manifest, args.out, args.workers, args.split)
    return EXIT_DATA if failures else EXIT_OK


def attack_rows(path: str) -> List[ManifestRow]:
    """Rows to attack from a manifest, or from a feature cache whose rows all count as test rows."""
    if read_header(path)[2:3] == ['split']:
        return load_manifest(path)
    table = load_features(path)
    if len(table) == 0:
        raise DataError(f"{path}: feature cache is empty")
    return [ManifestRow(row_id, ClassLabel(int(label)), 'test') for row_id, label in zip(table.ids, table.labels)]


def cmd_attack(args):
    rows = attack_rows(args.source)
    base_dir = args.image_root or os.path.dirname(os.path.abspath(args.source))
    result = attack_dataset(rows, args.qf, workers=args.workers, base_dir=base_dir)
    save_features(args.out, result.table)
    return EXIT_DATA if result.failures else EXIT_OK


def cmd_train(args):
    table = load_features(args.features)
    if not args.no_undersample:
        table = undersample(table, args.seed)
    subset = parse_subset(args.subset)
    algorithm = Algorithm.parse(args.algorithm).value
    params = {}
    if args.search and SEARCH_SPACES[algorithm]:
        params = random_search_cv(algorithm, table, subset, SEARCH_SPACES[algorithm], args.trials, args.seed).best
    model = train(algorithm, table, subset, params, args.seed)
    save_model(args.out, model)
    print(f"{algorithm} on {subset.name}: {model.hyperparams}")
    return EXIT_OK


def cmd_evaluate(args):
    model = load_model(args.model)
    metrics = evaluate(model, load_features(args.features))
    print(f"accuracy {metrics.accuracy:.4f}  f1_macro {metrics.f1_macro:.4f}  n_test {metrics.n_test}")
    print("confusion (rows true, columns predicted: real, gan, dm)")
    for tag, row in zip((c.tag for c in ClassLabel), metrics.confusion):
        print(f"  {tag:>4}  " + ' '.join(f"{v:6d}" for v in row))
    return EXIT_OK


def cmd_lime(args):
    model = load_model(args.model)
    contributions = average_contributions(model, load_features(args.features), args.samples,
                                          args.seed, args.workers)
    save_contributions(args.out, contributions)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    for subset, name in ((pos_lime(contributions), 'pos_lime.txt'), (abs_lime(contributions), 'abs_lime.txt')):
        save_subset(os.path.join(out_dir, name), subset)
        _print_subset(subset)
    return EXIT_OK


def cmd_subsets(args):
    if args.manual:
        subsets = manual_families()
    else:
        tokens = args.specs or [t for t in TABLE2_SUBSETS if t not in LIME_TOKENS]
        subsets = [parse_subset(t) for t in tokens]
    for subset in subsets:
        _print_subset(subset)
        if args.out_dir:
            safe = re.sub(r'[^A-Za-z0-9]+', '_', subset.name).strip('_').lower()
            save_subset(os.path.join(args.out_dir, f"{safe}.txt"), subset)
    return EXIT_OK


def cmd_grid(args):
    config = ExperimentConfig.load(args.config)
    overrides = {k: v for k, v in (('manifest', args.manifest), ('out_dir', args.out),
                                   ('workers', args.workers)) if v is not None}
    if args.reuse_cache:
        overrides['reuse_cache'] = True
    if overrides:
        config = ExperimentConfig.from_dict({**vars(config), **overrides})
    result = run_grid(config)
    if result.rows:
        emit_report(result.rows, config.out_dir, result.class_curves, result.contributions, result.avg_beta)
    for subset, algorithm, error in result.failures:
        print(f"FAILED {subset} / {algorithm}: {error}")
    print(f"{len(result.rows)} report rows written to {config.out_dir}")
    if result.partial:
        return EXIT_PARTIAL
    return EXIT_DATA if result.skipped_files else EXIT_OK


def cmd_report(args):
    for path in report_from_dir(args.grid_dir):
        print(path)
    return EXIT_OK


def cmd_synth(args):
    if args.profile_file:
        profiles = load_json(args.profile_file).get('profiles')
        if profiles is None:
            raise DataError(f"{args.profile_file} needs a 'profiles' entry (3 lists of 63 betas)")
    else:
        profiles = PROFILE_PRESETS[args.profile]()
    result = synth_generate(profiles, args.n_per_class, args.size, args.seed, args.out,
                            args.train_fraction, args.workers)
    save_manifest(os.path.join(args.out, 'manifest.csv'), result.manifest)
    save_features(os.path.join(args.out, 'ground_truth.csv'), result.ground_truth)
    print(f"{len(result.manifest)} images in {args.out}; class separation {result.separation:.1f} SE")
    return EXIT_OK


def build_parser() -> CliParser:
    parser = CliParser(prog='betaforensics', description='beta-AC deepfake forensics toolkit')
    parser.add_argument('--log-level', default=LOG_LEVEL, help='Logging level (default from config)')
    parser.add_argument('--log-file', default=LOG_FILE, help='Append log records here; empty disables')
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add('extract', cmd_extract, 'Extract beta vectors for a manifest')
    p.add_argument('--manifest', required=True)
    p.add_argument('--out', required=True, help='Feature cache CSV')
    p.add_argument('--split', choices=['train', 'test'], help='Only rows of this split')
    p.add_argument('--workers', type=int, default=WORKERS)

    p = add('attack', cmd_attack, 'JPEG-compress the test images and re-extract')
    p.add_argument('--in', '--manifest', dest='source', required=True,
                   help='Manifest, or a feature cache naming the images to attack')
    p.add_argument('--image-root', help='Directory image paths resolve against (default: next to --in)')
    p.add_argument('--qf', type=int, required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--workers', type=int, default=WORKERS)

    p = add('train', cmd_train, 'Train one model on a feature cache')
    p.add_argument('--features', required=True)
    p.add_argument('--algorithm', required=True, help='knn, random_forest, gradient_boosting or mlp')
    p.add_argument('--subset', default='all')
    p.add_argument('--search', action='store_true', help='Random-search hyperparameters with CV')
    p.add_argument('--trials', type=int, default=SEARCH_TRIALS)
    p.add_argument('--seed', type=int, default=SEED)
    p.add_argument('--no-undersample', action='store_true')
    p.add_argument('--out', required=True, help='Model JSON file')

    p = add('evaluate', cmd_evaluate, 'Accuracy, macro F1 and confusion of a model')
    p.add_argument('--model', required=True)
    p.add_argument('--features', required=True)

    p = add('lime', cmd_lime, 'Average LIME contributions of an MLP model')
    p.add_argument('--model', required=True)
    p.add_argument('--features', required=True, help='Test feature cache')
    p.add_argument('--out', required=True, help='Contributions CSV')
    p.add_argument('--samples', type=int, default=LIME_SAMPLES)
    p.add_argument('--seed', type=int, default=SEED)
    p.add_argument('--workers', type=int, default=WORKERS)

    p = add('subsets', cmd_subsets, 'List or write coefficient subsets')
    p.add_argument('specs', nargs='*', help='Subset tokens, e.g. first:28 center:15 abs-lime:contributions.csv')
    p.add_argument('--manual', action='store_true', help='Every first-k, last-t and centered subset')
    p.add_argument('--out-dir', help='Write one index file per subset here')

    p = add('grid', cmd_grid, 'Run the full subsets x algorithms x conditions grid')
    p.add_argument('--config', default=EXPERIMENT_FILE)
    p.add_argument('--manifest')
    p.add_argument('--out')
    p.add_argument('--workers', type=int)
    p.add_argument('--reuse-cache', action='store_true')

    p = add('report', cmd_report, 'Re-emit report and figures of a grid directory')
    p.add_argument('--grid-dir', required=True)

    p = add('synth', cmd_synth, 'Generate a synthetic surrogate dataset')
    p.add_argument('--profile', choices=sorted(PROFILE_PRESETS), default='tiered')
    p.add_argument('--profile-file', help='JSON with a "profiles" entry overriding --profile')
    p.add_argument('--n-per-class', type=int, default=SYNTH_PER_CLASS)
    p.add_argument('--size', type=int, default=SYNTH_IMAGE_SIZE)
    p.add_argument('--seed', type=int, default=SEED)
    p.add_argument('--train-fraction', type=float, default=TRAIN_FRACTION)
    p.add_argument('--out', required=True)
    p.add_argument('--workers', type=int, default=WORKERS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return args.func(args)
    except (SubsetError, ConfigError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (ForensicsError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_DATA
