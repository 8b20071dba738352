import numpy as np
import pytest

from errors import DimensionError
from spectral import (
    assemble_blocks,
    dct2_8x8,
    idct2_8x8,
    inverse_zigzag,
    partition_blocks,
    zigzag,
)


def naive_dct(block):
    out = np.zeros((8, 8))
    for u in range(8):
        for v in range(8):
            cu = 1 / np.sqrt(2) if u == 0 else 1.0
            cv = 1 / np.sqrt(2) if v == 0 else 1.0
            total = 0.0
            for x in range(8):
                for y in range(8):
                    total += (block[x, y] * np.cos((2 * x + 1) * u * np.pi / 16)
                              * np.cos((2 * y + 1) * v * np.pi / 16))
            out[u, v] = cu * cv / 4 * total
    return out


@pytest.mark.parametrize('shape, expected', [((16, 16), 4), ((9, 17), 2), ((64, 64), 64)])
def test_partition_block_count(shape, expected):
    assert partition_blocks(np.zeros(shape)).shape == (expected, 8, 8)


def test_partition_row_major_order_and_crop():
    image = np.arange(9 * 17).reshape(9, 17)
    blocks = partition_blocks(image)
    np.testing.assert_array_equal(blocks[0], image[:8, :8])
    np.testing.assert_array_equal(blocks[1], image[:8, 8:16])


@pytest.mark.parametrize('shape', [(64, 7), (7, 64), (8, 8, 3), (64,)])
def test_partition_rejects_bad_shapes(shape):
    with pytest.raises(DimensionError):
        partition_blocks(np.zeros(shape))


def test_assemble_inverts_partition_and_keeps_remainder():
    rng = np.random.default_rng(0)
    image = rng.integers(0, 256, size=(20, 27)).astype(float)
    blocks = partition_blocks(image)
    np.testing.assert_array_equal(assemble_blocks(blocks, image), image)
    rebuilt = assemble_blocks(np.zeros_like(blocks), image)
    assert np.all(rebuilt[:16, :24] == 0)
    np.testing.assert_array_equal(rebuilt[16:, :], image[16:, :])
    np.testing.assert_array_equal(rebuilt[:, 24:], image[:, 24:])


def test_constant_block_dct():
    coeffs = dct2_8x8(np.full((8, 8), 128.0))
    assert coeffs[0, 0] == pytest.approx(1024.0, abs=1e-9)
    coeffs[0, 0] = 0
    assert np.max(np.abs(coeffs)) < 1e-9


def test_basis_function_dct():
    x = np.arange(8)
    block = np.outer(np.cos((2 * x + 1) * 3 * np.pi / 16), np.cos((2 * x + 1) * 5 * np.pi / 16))
    expected = np.zeros((8, 8))
    expected[3, 5] = 4.0
    np.testing.assert_allclose(dct2_8x8(block), expected, atol=1e-9)


def test_dct_matches_direct_summation():
    rng = np.random.default_rng(1)
    blocks = rng.uniform(-128, 128, size=(10, 8, 8))
    fast = dct2_8x8(blocks)
    for block, coeffs in zip(blocks, fast):
        np.testing.assert_allclose(coeffs, naive_dct(block), atol=1e-9)


def test_batched_dct_parseval_and_round_trip():
    rng = np.random.default_rng(2)
    blocks = rng.uniform(-128, 128, size=(1000, 8, 8))
    coeffs = dct2_8x8(blocks)
    energy_in = np.sum(blocks ** 2, axis=(1, 2))
    energy_out = np.sum(coeffs ** 2, axis=(1, 2))
    np.testing.assert_allclose(energy_out, energy_in, rtol=1e-6)
    assert np.max(np.abs(idct2_8x8(coeffs) - blocks)) < 1e-9


def test_idct_special_cases():
    np.testing.assert_array_equal(idct2_8x8(np.zeros((8, 8))), np.zeros((8, 8)))
    dc = np.zeros((8, 8))
    dc[0, 0] = 1024.0
    np.testing.assert_allclose(idct2_8x8(dc), np.full((8, 8), 128.0), atol=1e-9)


def test_zigzag_standard_order():
    matrix = np.arange(64).reshape(8, 8)
    vector = zigzag(matrix)
    assert vector[:8].tolist() == [0, 1, 8, 16, 9, 2, 3, 10]
    assert vector[63] == 63
    assert sorted(vector.tolist()) == list(range(64))


def test_zigzag_bijection():
    rng = np.random.default_rng(3)
    blocks = rng.normal(size=(5, 8, 8))
    np.testing.assert_array_equal(inverse_zigzag(zigzag(blocks)), blocks)
    vectors = rng.normal(size=(5, 64))
    np.testing.assert_array_equal(zigzag(inverse_zigzag(vectors)), vectors)


@pytest.mark.parametrize('position, cell', [(0, (0, 0)), (63, (7, 7)), (2, (1, 0))])
def test_inverse_zigzag_single_entry(position, cell):
    vector = np.zeros(64)
    vector[position] = 1.0
    matrix = inverse_zigzag(vector)
    assert matrix[cell] == 1.0
    assert np.count_nonzero(matrix) == 1


def test_inverse_zigzag_rejects_wrong_length():
    with pytest.raises(DimensionError):
        inverse_zigzag(np.zeros(63))


def test_dct_is_linear():
    rng = np.random.default_rng(8)
    b1, b2 = rng.uniform(0, 255, size=(2, 8, 8))
    a, b = 1.7, -0.4
    np.testing.assert_allclose(dct2_8x8(a * b1 + b * b2), a * dct2_8x8(b1) + b * dct2_8x8(b2), atol=1e-9)


@pytest.mark.parametrize('c', [7.0, -12.5])
def test_constant_shift_moves_only_dc(c):
    block = np.random.default_rng(9).uniform(0, 255, size=(8, 8))
    delta = dct2_8x8(block + c) - dct2_8x8(block)
    assert delta[0, 0] == pytest.approx(8 * c, abs=1e-9)
    delta[0, 0] = 0.0
    np.testing.assert_allclose(delta, np.zeros((8, 8)), atol=1e-9)
