"""Block partitioning, the orthonormal 8x8 DCT-II and the JPEG zig-zag scan.

All functions accept a single 8x8 block or a stack of blocks with shape
``(..., 8, 8)`` and return new arrays.
"""
import numpy as np

from config import BLOCK_SIZE
from errors import DimensionError


def _cosine_matrix(n=BLOCK_SIZE):
    """T[u, x] = C(u)/2 * cos((2x+1) u pi / 16), so DCT = T @ f @ T.T."""
    u = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    t = np.cos((2 * x + 1) * u * np.pi / (2 * n)) * np.sqrt(2.0 / n)
    t[0, :] /= np.sqrt(2.0)
    return t


DCT_MATRIX = _cosine_matrix()
DCT_MATRIX_T = DCT_MATRIX.T.copy()


def _zigzag_order(n=BLOCK_SIZE):
    # Anti-diagonals in order; odd diagonals run down-left, even ones up-right.
    def key(flat):
        r, c = divmod(flat, n)
        s = r + c
        return s, (r if s % 2 else c)
    return np.array(sorted(range(n * n), key=key), dtype=np.intp)


ZIGZAG_ORDER = _zigzag_order()
ZIGZAG_INVERSE = np.argsort(ZIGZAG_ORDER)


def partition_blocks(image):
    """Split a 2-D image into non-overlapping 8x8 blocks in row-major block order.

    Right and bottom remainders (W mod 8, H mod 8) are cropped.
    Returns an array of shape (n_blocks, 8, 8).
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise DimensionError(f"expected a 2-D grayscale image, got shape {image.shape}")
    height, width = image.shape
    if height < BLOCK_SIZE or width < BLOCK_SIZE:
        raise DimensionError(f"image {width}x{height} is smaller than one {BLOCK_SIZE}x{BLOCK_SIZE} block")
    rows, cols = height // BLOCK_SIZE, width // BLOCK_SIZE
    cropped = image[:rows * BLOCK_SIZE, :cols * BLOCK_SIZE]
    return (cropped.reshape(rows, BLOCK_SIZE, cols, BLOCK_SIZE)
                   .swapaxes(1, 2)
                   .reshape(rows * cols, BLOCK_SIZE, BLOCK_SIZE))


def assemble_blocks(blocks, image):
    """Write blocks back over a copy of ``image``; remainder strips are kept as they are."""
    out = np.array(image, copy=True)
    height, width = out.shape
    rows, cols = height // BLOCK_SIZE, width // BLOCK_SIZE
    blocks = np.asarray(blocks)
    if blocks.shape != (rows * cols, BLOCK_SIZE, BLOCK_SIZE):
        raise DimensionError(f"{blocks.shape[0]} blocks do not tile a {width}x{height} image")
    tiled = (blocks.reshape(rows, cols, BLOCK_SIZE, BLOCK_SIZE)
                   .swapaxes(1, 2)
                   .reshape(rows * BLOCK_SIZE, cols * BLOCK_SIZE))
    out[:rows * BLOCK_SIZE, :cols * BLOCK_SIZE] = tiled
    return out


def dct2_8x8(block):
    """Separable 2-D DCT of one block or a stack of blocks."""
    block = np.asarray(block, dtype=np.float64)
    return DCT_MATRIX @ block @ DCT_MATRIX_T


def idct2_8x8(coeffs):
    """Inverse of dct2_8x8 (the transform is orthonormal)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return DCT_MATRIX_T @ coeffs @ DCT_MATRIX


def zigzag(block):
    """Flatten (..., 8, 8) into (..., 64) in JPEG zig-zag order; index 0 is DC."""
    block = np.asarray(block)
    flat = block.reshape(block.shape[:-2] + (BLOCK_SIZE * BLOCK_SIZE,))
    return flat[..., ZIGZAG_ORDER]


def inverse_zigzag(vector):
    """Rebuild (..., 8, 8) matrices from zig-zag ordered (..., 64) vectors."""
    vector = np.asarray(vector)
    if vector.shape[-1] != BLOCK_SIZE * BLOCK_SIZE:
        raise DimensionError(f"zig-zag vectors need 64 entries, got {vector.shape[-1]}")
    flat = vector[..., ZIGZAG_INVERSE]
    return flat.reshape(vector.shape[:-1] + (BLOCK_SIZE, BLOCK_SIZE))
