"""Luminance JPEG quantization at a given quality factor.

Simulates the lossy part of a baseline JPEG encode/decode on the luma
plane only: level shift, 8x8 DCT, IJG-scaled quantization, reconstruction.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import List, Sequence

import numpy as np

from datasets import FeatureTable, ManifestRow, extract_table
from errors import QualityFactorError
from spectral import assemble_blocks, dct2_8x8, idct2_8x8, partition_blocks

logger = logging.getLogger(__name__)

# Don't mess with matrix formatting
# fmt: off
STD_LUMA_TABLE = np.array([
    [16,  11,  10,  16,  24,  40,  51,  61],
    [12,  12,  14,  19,  26,  58,  60,  55],
    [14,  13,  16,  24,  40,  57,  69,  56],
    [14,  17,  22,  29,  51,  87,  80,  62],
    [18,  22,  37,  56,  68, 109, 103,  77],
    [24,  35,  55,  64,  81, 104, 113,  92],
    [49,  64,  78,  87, 103, 121, 120, 101],
    [72,  92,  95,  98, 112, 100, 103,  99],
], dtype=np.int64)
# fmt: on


@dataclass
class AttackResult:
    """Features of the attacked images plus the manifest paths that failed."""

    qf: int
    table: FeatureTable
    failures: List[str] = field(default_factory=list)


def _check_qf(qf):
    if isinstance(qf, bool) or int(qf) != qf or not 1 <= qf <= 100:
        raise QualityFactorError(f"quality factor must be an integer in [1, 100], got {qf!r}")
    return int(qf)


def quality_scale(qf: int) -> int:
    """IJG percentage scaling: 5000/qf below 50, 200 - 2*qf from 50 up."""
    qf = _check_qf(qf)
    return 5000 // qf if qf < 50 else 200 - 2 * qf


def quant_table(qf: int) -> np.ndarray:
    scale = quality_scale(qf)
    table = (STD_LUMA_TABLE * scale + 50) // 100
    return np.clip(table, 1, 255)


def round_half_away(x):
    """Nearest integer, ties away from zero."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def compress_image(image, qf: int = 75, table=None) -> np.ndarray:
    """Quantize every full 8x8 block of ``image``; remainder strips are copied unchanged.

    ``table`` replaces the QF-derived quantization table when given.
    Returns an 8-bit image.
    """
    q = quant_table(qf) if table is None else np.asarray(table, dtype=np.float64)
    pixels = np.asarray(image, dtype=np.float64)
    blocks = partition_blocks(pixels)
    coeffs = dct2_8x8(blocks - 128.0)
    levels = round_half_away(coeffs / q)
    rebuilt = idct2_8x8(levels * q) + 128.0
    rebuilt = np.clip(round_half_away(rebuilt), 0, 255)
    out = assemble_blocks(rebuilt, pixels)
    return np.clip(round_half_away(out), 0, 255).astype(np.uint8)


def attack_dataset(rows: Sequence[ManifestRow], qf: int, workers: int = 1,
                   base_dir: str = '.') -> AttackResult:
    """Compress the test images among ``rows`` at ``qf`` and re-extract their beta vectors.

    Training rows are left alone: models are fit on RAW features only.
    """
    qf = _check_qf(qf)
    test_rows = [r for r in rows if r.split == 'test']
    table, failures = extract_table(test_rows, workers=workers,
                                    preprocess=partial(compress_image, qf=qf), base_dir=base_dir)
    if failures:
        logger.warning("QF%d attack: %d of %d images skipped", qf, len(failures), len(test_rows))
    else:
        logger.info("QF%d attack: %d test images re-extracted", qf, len(test_rows))
    return AttackResult(qf=qf, table=table, failures=failures)
