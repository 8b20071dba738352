#!/usr/bin/env python3
"""
Beta-AC Inspection Tool

Usage:
  python tools/inspect_beta.py IMAGE [--qf 90 70 50 30] [--band-start 48]

What it does:
- Decodes the image as luma and prints its 63 beta-AC values in zig-zag order
- Prints the DC Gaussian fit and the block count
- Re-extracts after JPEG quantization at each QF and prints the mean beta of
  the high-frequency band, with the change relative to the uncompressed image

Notes:
- Images smaller than 16x8 pixels hold fewer than two blocks and are rejected.
- Pixels beyond the last full 8x8 block are ignored.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np  # noqa: E402

from config import HIGH_FREQUENCY_START, QUALITY_FACTORS  # noqa: E402
from errors import ForensicsError  # noqa: E402
from features import extract_beta_vector, load_gray_image  # noqa: E402
from jpeg_attack import compress_image  # noqa: E402


def band_mean(beta, band_start: int) -> float:
    return float(np.mean(beta[band_start - 1:]))


def run(path: str, qfs=QUALITY_FACTORS, band_start: int = HIGH_FREQUENCY_START) -> dict:
    """Print the report for one image and return the high-band means keyed by condition."""
    print(f"[INFO] Loading {path}...")
    image = load_gray_image(path)
    print(f"[INFO] {image.shape[1]}x{image.shape[0]} luma, range {image.min():.0f}..{image.max():.0f}")
    raw = extract_beta_vector(image)
    print(f"[INFO] {raw.n_blocks} blocks; DC mean {raw.dc.mean:.2f}, std {raw.dc.std_dev:.2f}")
    for start in range(0, len(raw.beta), 8):
        chunk = ' '.join(f"{v:8.3f}" for v in raw.beta[start:start + 8])
        print(f"  beta[{start + 1:2d}..{min(start + 8, len(raw.beta)):2d}] {chunk}")

    means = {'RAW': band_mean(raw.beta, band_start)}
    print(f"[BAND] indices {band_start}..63  RAW  mean beta {means['RAW']:.3f}")
    for qf in qfs:
        beta = extract_beta_vector(compress_image(image, qf)).beta
        means[f"QF{qf}"] = band_mean(beta, band_start)
        change = (means[f"QF{qf}"] / means['RAW'] - 1.0) * 100 if means['RAW'] > 0 else 0.0
        print(f"[BAND] indices {band_start}..63  QF{qf:<3d} mean beta {means[f'QF{qf}']:.3f} ({change:+.1f}%)")
    return means


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument('image', help='Image file to inspect')
    ap.add_argument('--qf', type=int, nargs='+', default=list(QUALITY_FACTORS), help='Quality factors')
    ap.add_argument('--band-start', type=int, default=HIGH_FREQUENCY_START, help='First AC index of the band')
    args = ap.parse_args()
    try:
        run(args.image, args.qf, args.band_start)
    except (ForensicsError, OSError) as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        sys.exit(2)
