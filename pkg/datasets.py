"""Manifests, feature tables, splitting, under-sampling and synthetic surrogates."""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from config import (
    AC_COUNT,
    BLOCK_SIZE,
    CLASS_TAGS,
    SYNTH_CLASS_SCALES,
    SYNTH_DC_MEAN,
    SYNTH_DC_STD,
    TRAIN_FRACTION,
)
from errors import DataError, InvalidProfileError, MissingClassError
from features import extract_beta_vector, extract_files
from spectral import assemble_blocks, idct2_8x8, inverse_zigzag

logger = logging.getLogger(__name__)

ALL_INDICES = tuple(range(1, AC_COUNT + 1))
SPLITS = ('train', 'test')


class ClassLabel(IntEnum):
    REAL = 0
    GAN = 1
    DM = 2

    @property
    def tag(self) -> str:
        return CLASS_TAGS[self.value]

    @classmethod
    def parse(cls, text) -> 'ClassLabel':
        key = str(text).strip().lower()
        if key not in CLASS_TAGS:
            raise DataError(f"unknown class label {text!r}; expected one of {', '.join(CLASS_TAGS)}")
        return cls(CLASS_TAGS.index(key))


@dataclass(frozen=True)
class ManifestRow:
    path: str
    label: ClassLabel
    split: str = 'train'


@dataclass
class FeatureTable:
    """Rows of (id, label, beta features); ``indices`` names the AC index of each column."""

    ids: List[str]
    labels: np.ndarray
    x: np.ndarray
    indices: Tuple[int, ...] = ALL_INDICES

    def __post_init__(self):
        self.ids = [str(i) for i in self.ids]
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        self.x = np.asarray(self.x, dtype=np.float64).reshape(len(self.labels), len(self.indices))
        if len(self.ids) != len(self.labels):
            raise DataError(f"{len(self.ids)} ids for {len(self.labels)} labels")
        if not np.all(np.isfinite(self.x)):
            raise DataError("feature table contains non-finite values")

    def __len__(self):
        return len(self.ids)

    def take(self, rows) -> 'FeatureTable':
        rows = np.asarray(rows, dtype=np.intp)
        return FeatureTable([self.ids[i] for i in rows], self.labels[rows], self.x[rows], self.indices)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(ClassLabel))

    def select_ids(self, ids) -> 'FeatureTable':
        """Rows whose id is in ``ids``, in table order."""
        wanted = set(ids)
        return self.take([i for i, row_id in enumerate(self.ids) if row_id in wanted])

    @classmethod
    def empty(cls, indices=ALL_INDICES) -> 'FeatureTable':
        return cls([], np.zeros(0, dtype=np.int64), np.zeros((0, len(indices))), tuple(indices))


def _require_all_classes(labels, what):
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=len(ClassLabel))
    missing = [ClassLabel(i).tag for i, n in enumerate(counts) if n == 0]
    if missing:
        raise MissingClassError(f"{what}: no rows for class(es) {', '.join(missing)}")
    return counts


def split_train_test(rows: Sequence, train_fraction: float = TRAIN_FRACTION, seed: int = 0):
    """Stratified shuffle split; round(fraction * n) rows of each class go to train.

    ``rows`` are any objects with a ``label`` attribute. Both outputs keep
    the input order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train fraction must lie in (0, 1), got {train_fraction}")
    labels = np.array([int(r.label) for r in rows], dtype=np.int64)
    _require_all_classes(labels, "split")
    rng = np.random.default_rng(seed)
    in_train = np.zeros(len(rows), dtype=bool)
    for cls in ClassLabel:
        members = np.flatnonzero(labels == cls)
        n_train = int(np.floor(train_fraction * len(members) + 0.5))
        in_train[rng.permutation(members)[:n_train]] = True
    train = [r for r, t in zip(rows, in_train) if t]
    test = [r for r, t in zip(rows, in_train) if not t]
    return train, test


def undersample(train: FeatureTable, seed: int = 0) -> FeatureTable:
    """Reduce every class to the minority count by sampling without replacement."""
    counts = _require_all_classes(train.labels, "under-sampling")
    target = int(counts.min())
    rng = np.random.default_rng(seed)
    keep = []
    for cls in ClassLabel:
        members = np.flatnonzero(train.labels == cls)
        keep.append(rng.choice(members, size=target, replace=False))
    kept = np.sort(np.concatenate(keep))
    logger.info("Under-sampled training set from %s to %d per class", counts.tolist(), target)
    return train.take(kept)


def resolve_path(path, base_dir) -> str:
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def extract_table(rows: Sequence[ManifestRow], workers: int = 1,
                  preprocess: Optional[Callable] = None, base_dir: str = '.'):
    """Feature table for manifest rows; returns (table, failed_paths).

    Table ids are the manifest paths as written.
    """
    results = extract_files([resolve_path(r.path, base_dir) for r in rows],
                            workers=workers, preprocess=preprocess)
    ids, labels, betas, failures = [], [], [], []
    for row, res in zip(rows, results):
        if res.ok:
            ids.append(row.path)
            labels.append(int(row.label))
            betas.append(res.beta)
        else:
            failures.append(row.path)
    if not ids:
        return FeatureTable.empty(), failures
    return FeatureTable(ids, labels, np.vstack(betas)), failures


# Synthetic surrogates
# --------------------

def base_profile(peak: float = 18.0, floor: float = 1.5, decay: float = 10.0) -> np.ndarray:
    """Beta curve decaying with zig-zag index, shaped like natural-image class averages."""
    i = np.arange(1, AC_COUNT + 1)
    return floor + peak * np.exp(-(i - 1) / decay)


def tiered_profiles(scales=SYNTH_CLASS_SCALES, base=None) -> np.ndarray:
    """Every index separated: class c gets ``scales[c] * base``."""
    base = base_profile() if base is None else np.asarray(base, dtype=np.float64)
    return np.vstack([s * base for s in scales])


def band_profiles(band, scales=SYNTH_CLASS_SCALES, base=None) -> np.ndarray:
    """Classes identical outside ``band`` (AC indices), scaled inside it."""
    base = base_profile() if base is None else np.asarray(base, dtype=np.float64)
    mask = np.zeros(AC_COUNT, dtype=bool)
    mask[np.asarray(list(band)) - 1] = True
    return np.vstack([np.where(mask, s * base, base) for s in scales])


def highfreq_profiles(scales=SYNTH_CLASS_SCALES) -> np.ndarray:
    return band_profiles(range(31, AC_COUNT + 1), scales, base_profile(peak=18.0, floor=2.0))


def lowfreq_profiles(scales=SYNTH_CLASS_SCALES) -> np.ndarray:
    return band_profiles(range(1, 29), scales, base_profile(peak=24.0, floor=4.0))


PROFILE_PRESETS = {
    'tiered': tiered_profiles,
    'highfreq': highfreq_profiles,
    'lowfreq': lowfreq_profiles,
}


def _check_profiles(profiles, image_size=None) -> np.ndarray:
    profiles = np.asarray(profiles, dtype=np.float64)
    if profiles.ndim == 1:
        profiles = profiles[None, :]
    if profiles.shape[-1] != AC_COUNT:
        raise InvalidProfileError(f"profiles need {AC_COUNT} entries per class, got {profiles.shape[-1]}")
    if not np.all(np.isfinite(profiles)) or np.any(profiles < 0):
        raise InvalidProfileError("beta targets must be finite and non-negative")
    if image_size is not None and (image_size < 2 * BLOCK_SIZE or image_size % BLOCK_SIZE):
        raise InvalidProfileError(f"image size must be a multiple of {BLOCK_SIZE} and hold 2+ blocks, got {image_size}")
    return profiles


def synth_image(profile, image_size: int, rng) -> np.ndarray:
    """One 8-bit image whose block AC coefficients are Laplace(0, profile[i])."""
    profile = _check_profiles(profile, image_size)[0]
    n_blocks = (image_size // BLOCK_SIZE) ** 2
    coeffs = np.empty((n_blocks, BLOCK_SIZE * BLOCK_SIZE))
    coeffs[:, 0] = rng.normal(SYNTH_DC_MEAN, SYNTH_DC_STD, size=n_blocks)
    coeffs[:, 1:] = rng.laplace(0.0, 1.0, size=(n_blocks, AC_COUNT)) * profile
    blocks = idct2_8x8(inverse_zigzag(coeffs))
    canvas = np.zeros((image_size, image_size))
    pixels = assemble_blocks(blocks, canvas)
    return np.clip(np.floor(pixels + 0.5), 0, 255).astype(np.uint8)


def _image_rng(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def _synth_one(args):
    profile, image_size, seed, index, path = args
    image = synth_image(profile, image_size, _image_rng(seed, index))
    if path is not None:
        Image.fromarray(image).save(path, format='PNG')
    return extract_beta_vector(image).beta


def _run_synth(jobs, workers):
    if workers <= 1 or len(jobs) < 2:
        return [_synth_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_synth_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _jobs(profiles, n_per_class, image_size, seed, out_dir=None):
    jobs, labels = [], []
    index = 0
    for cls in ClassLabel:
        for k in range(n_per_class):
            path = None
            if out_dir is not None:
                path = os.path.join(out_dir, cls.tag, f"{cls.tag}_{k:05d}.png")
            jobs.append((profiles[cls], image_size, seed, index, path))
            labels.append(cls)
            index += 1
    return jobs, labels


def synth_features(profiles, n_per_class: int, image_size: int, seed: int = 0,
                   workers: int = 1) -> FeatureTable:
    """In-memory variant of synth_generate: realized beta vectors only."""
    profiles = _check_profiles(profiles, image_size)
    if profiles.shape[0] != len(ClassLabel):
        raise InvalidProfileError(f"need one profile per class, got {profiles.shape[0]}")
    jobs, labels = _jobs(profiles, n_per_class, image_size, seed)
    betas = _run_synth(jobs, workers)
    ids = [f"synth/{ClassLabel(l).tag}/{i}" for i, l in enumerate(labels)]
    return FeatureTable(ids, [int(l) for l in labels], np.vstack(betas))


@dataclass
class SynthResult:
    manifest: List[ManifestRow]
    ground_truth: FeatureTable
    separation: float
    out_dir: str = ''
    profiles: np.ndarray = field(default_factory=lambda: np.zeros((0, AC_COUNT)))


def class_separation(table: FeatureTable) -> float:
    """Smallest pairwise gap between class-mean curves, in standard-error units.

    For each class pair the per-index |mean difference| / combined standard
    error is averaged over indices; the minimum over pairs is returned.
    """
    stats = []
    for cls in ClassLabel:
        x = table.x[table.labels == cls]
        if len(x) < 2:
            raise MissingClassError(f"separation needs 2+ rows of class {cls.tag}")
        stats.append((x.mean(axis=0), x.var(axis=0, ddof=1) / len(x)))
    gaps = []
    for a in range(len(stats)):
        for b in range(a + 1, len(stats)):
            se = np.sqrt(stats[a][1] + stats[b][1])
            z = np.abs(stats[a][0] - stats[b][0]) / np.where(se > 0, se, np.inf)
            gaps.append(float(z.mean()))
    return min(gaps)


def synth_generate(profiles, n_per_class: int, image_size: int, seed: int, out_dir: str,
                   train_fraction: float = TRAIN_FRACTION, workers: int = 1) -> SynthResult:
    """Write synthetic PNGs plus a manifest; realized betas are measured from the saved pixels."""
    profiles = _check_profiles(profiles, image_size)
    if profiles.shape[0] != len(ClassLabel):
        raise InvalidProfileError(f"need one profile per class, got {profiles.shape[0]}")
    for cls in ClassLabel:
        os.makedirs(os.path.join(out_dir, cls.tag), exist_ok=True)
    jobs, labels = _jobs(profiles, n_per_class, image_size, seed, out_dir)
    betas = _run_synth(jobs, workers)

    rows = [ManifestRow(os.path.relpath(job[4], out_dir), label) for job, label in zip(jobs, labels)]
    train, _ = split_train_test(rows, train_fraction, seed)
    train_paths = {r.path for r in train}
    manifest = [ManifestRow(r.path, r.label, 'train' if r.path in train_paths else 'test') for r in rows]

    truth = FeatureTable([r.path for r in rows], [int(l) for l in labels], np.vstack(betas))
    separation = class_separation(truth) if n_per_class >= 2 else 0.0
    logger.info("Generated %d synthetic images in %s (class separation %.1f SE)",
                len(rows), out_dir, separation)
    return SynthResult(manifest=manifest, ground_truth=truth, separation=separation,
                       out_dir=out_dir, profiles=profiles)
