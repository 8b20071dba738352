"""Laplacian scale statistics of block-DCT coefficients.

Every AC coefficient population (one zig-zag position collected over all
8x8 blocks of an image) is modelled as Laplace(mu, beta) and summarised by
beta = sigma / sqrt(2). The DC population gets a Gaussian fit.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from config import AC_COUNT, CLASS_TAGS
from errors import DataError, InsufficientSamplesError, MissingClassError
from spectral import dct2_8x8, partition_blocks, zigzag

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class DcStats:
    mean: float
    std_dev: float


@dataclass(frozen=True)
class BetaVector:
    """beta[i - 1] is the scale for AC zig-zag index i (1..63)."""

    beta: np.ndarray
    mu: np.ndarray
    dc: DcStats
    n_blocks: int


@dataclass
class ExtractionResult:
    path: str
    beta: Optional[np.ndarray] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def estimate_beta(samples) -> float:
    """Population standard deviation divided by sqrt(2)."""
    values = np.asarray(samples, dtype=np.float64).ravel()
    if values.size < 2:
        raise InsufficientSamplesError(f"beta needs at least 2 samples, got {values.size}")
    if np.all(values == values[0]):
        return 0.0
    return float(values.std() / SQRT2)


def block_coefficients(image) -> np.ndarray:
    """Zig-zag ordered DCT coefficients of every block, shape (n_blocks, 64).

    The block mean is removed before the transform and the DC term rebuilt
    from it (DC = 8 * mean), so AC terms of integer images are exactly
    invariant to constant offsets.
    """
    blocks = partition_blocks(np.asarray(image, dtype=np.float64))
    means = blocks.mean(axis=(1, 2))
    coeffs = zigzag(dct2_8x8(blocks - means[:, None, None]))
    coeffs[:, 0] = 8.0 * means
    return coeffs


def extract_beta_vector(image) -> BetaVector:
    coeffs = block_coefficients(image)
    n_blocks = coeffs.shape[0]
    if n_blocks < 2:
        raise InsufficientSamplesError(f"image yields {n_blocks} block; beta needs at least 2")
    ac = coeffs[:, 1:]
    beta = ac.std(axis=0) / SQRT2
    # Exactly zero where a population is constant
    beta[np.all(ac == ac[0], axis=0)] = 0.0
    dc = coeffs[:, 0]
    return BetaVector(
        beta=beta,
        mu=ac.mean(axis=0),
        dc=DcStats(mean=float(dc.mean()), std_dev=float(dc.std())),
        n_blocks=n_blocks,
    )


def average_beta_by_class(features: Sequence[Tuple[np.ndarray, int]]) -> np.ndarray:
    """Mean beta curve per class, rows ordered real, GAN, DM."""
    sums = np.zeros((len(CLASS_TAGS), AC_COUNT))
    counts = np.zeros(len(CLASS_TAGS), dtype=int)
    for beta, label in features:
        sums[int(label)] += np.asarray(beta, dtype=np.float64)
        counts[int(label)] += 1
    missing = [CLASS_TAGS[i] for i in range(len(CLASS_TAGS)) if counts[i] == 0]
    if missing:
        raise MissingClassError(f"no samples for class(es): {', '.join(missing)}")
    return sums / counts[:, None]


def load_gray_image(path) -> np.ndarray:
    """Decode an 8-bit image as a 2-D float array of luma values."""
    with Image.open(path) as img:
        img.load()
        if img.mode in ('I', 'F') or img.mode.startswith('I;'):
            raise DataError(f"{path}: {img.mode} images are not 8-bit; convert to L or RGB first")
        if img.mode == 'L':
            return np.asarray(img, dtype=np.float64)
        if img.mode in ('1', 'LA'):
            return np.asarray(img.convert('L'), dtype=np.float64)
        rgb = np.asarray(img.convert('RGB'), dtype=np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(luma + 0.5)


def _extract_path(path, preprocess=None) -> ExtractionResult:
    try:
        image = load_gray_image(path)
        if preprocess is not None:
            image = preprocess(image)
        return ExtractionResult(path=str(path), beta=extract_beta_vector(image).beta)
    except Exception as e:
        return ExtractionResult(path=str(path), error=f"{type(e).__name__}: {e}")


def extract_files(paths, workers: int = 1,
                  preprocess: Optional[Callable] = None) -> List[ExtractionResult]:
    """Extract beta vectors for many files; results keep the input order.

    Failures are returned as results with ``error`` set, never raised.
    ``preprocess`` must be picklable when ``workers > 1``.
    """
    paths = [str(p) for p in paths]
    if workers <= 1 or len(paths) < 2:
        results = [_extract_path(p, preprocess) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_path, paths, [preprocess] * len(paths),
                                    chunksize=max(1, len(paths) // (4 * workers))))
    for res in results:
        if not res.ok:
            logger.warning("Skipping %s: %s", res.path, res.error)
    return results
