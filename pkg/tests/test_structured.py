import numpy as np
import pytest
from numpy.testing import assert_allclose

from fmpbem.numerics.errors import DimensionError
from fmpbem.numerics.structured import (BandedBlockToeplitz, BlockHankelMatrix, BlockToeplitzMatrix,
                                        PermutationMap, StructuredOperator, circulant_embed, hankel_matvec,
                                        spectrum, toeplitz_matvec)


def random_blocks(counts, b, seed=0):
    rng = np.random.default_rng(seed)
    shape = tuple(2 * m - 1 for m in reversed(counts)) + (b, b)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_vector(n, seed=1):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@pytest.mark.parametrize("counts", [(3, 1, 1), (3, 2, 1), (2, 3, 2), (1, 1, 4), (1, 1, 1)])
def test_toeplitz_matvec_matches_dense(counts):
    b = 3
    matrix = BlockToeplitzMatrix(counts=counts, blocks=random_blocks(counts, b))
    p = random_vector(matrix.shape[1])
    spec = spectrum(circulant_embed(matrix), counts)
    assert_allclose(toeplitz_matvec(spec, p), matrix.to_dense() @ p, rtol=1e-12, atol=1e-12)


def test_dense_expansion_places_blocks_by_offset():
    counts = (3, 2, 1)
    matrix = BlockToeplitzMatrix(counts=counts, blocks=random_blocks(counts, 2))
    dense = matrix.to_dense()
    # target cell (i=2, j=0), source cell (i=0, j=1): offset (2, -1, 0)
    target, source = 2 + 3 * 0, 0 + 3 * 1
    assert_allclose(dense[2 * target:2 * target + 2, 2 * source:2 * source + 2], matrix.block((2, -1, 0)))
    assert len(list(matrix.offsets())) == 5 * 3 * 1
    assert matrix.storage_bytes == 5 * 3 * 1 * 4 * 16


@pytest.mark.parametrize("axis,counts", [(0, (3, 2, 1)), (2, (2, 2, 3)), (1, (1, 4, 1))])
def test_hankel_matvec_matches_dense(axis, counts):
    b = 2
    hankel = BlockHankelMatrix(counts=counts, blocks=random_blocks(counts, b, seed=5), axis=axis)
    p = random_vector(int(np.prod(counts)) * b)
    spec = spectrum(circulant_embed(hankel.permuted()), counts)
    assert_allclose(hankel_matvec(spec, hankel.permutation(), p), hankel.to_dense() @ p, rtol=1e-12, atol=1e-12)


def test_hankel_blocks_depend_on_index_sum():
    counts = (3, 1, 1)
    hankel = BlockHankelMatrix(counts=counts, blocks=random_blocks(counts, 1, seed=2), axis=0)
    dense = hankel.to_dense()
    assert dense[0, 2] == pytest.approx(dense[1, 1])
    assert dense[1, 1] == pytest.approx(dense[2, 0])
    assert dense[2, 2] == pytest.approx(hankel.block((4, 0, 0))[0, 0])


def test_permutation_is_an_involution():
    perm = PermutationMap(counts=(3, 2, 2), axis=1)
    v = random_vector(12 * 2)
    assert_allclose(perm.apply(perm.apply(v, 2), 2), v)
    indices = perm.indices
    assert sorted(indices) == list(range(12))
    assert indices[0] == 3


def test_banded_matches_full_toeplitz():
    counts = (4, 3, 1)
    rng = np.random.default_rng(7)
    blocks = {offset: rng.normal(size=(2, 2)) + 0j for offset in [(0, 0, 0), (1, 0, 0), (-1, 1, 0), (3, -2, 0)]}
    banded = BandedBlockToeplitz(counts=counts, blocks=blocks, block_shape=(2, 2))
    p = random_vector(12 * 2)
    assert_allclose(banded.matvec(p), banded.to_dense() @ p, rtol=1e-12, atol=1e-12)
    assert banded.storage_bytes == 4 * 4 * 16


def test_structured_operator_sums_both_parts():
    counts = (3, 1, 2)
    toeplitz = BlockToeplitzMatrix(counts=counts, blocks=random_blocks(counts, 2, seed=3))
    hankel = BlockHankelMatrix(counts=counts, blocks=random_blocks(counts, 2, seed=4), axis=2)
    op = StructuredOperator.from_matrices(toeplitz, hankel)
    p = random_vector(op.size)
    assert op.size == 12
    assert_allclose(op.matvec(p), (toeplitz.to_dense() + hankel.to_dense()) @ p, rtol=1e-12, atol=1e-12)
    linear = op.as_linear_operator()
    assert_allclose(linear.matvec(p), op.matvec(p))


def test_dimension_checks():
    counts = (2, 1, 1)
    with pytest.raises(DimensionError):
        BlockToeplitzMatrix(counts=counts, blocks=np.zeros((1, 1, 2, 2, 2), dtype=complex))
    matrix = BlockToeplitzMatrix(counts=counts, blocks=random_blocks(counts, 2))
    spec = spectrum(circulant_embed(matrix), counts)
    with pytest.raises(DimensionError):
        toeplitz_matvec(spec, np.zeros(5, dtype=complex))


def test_from_blocks_fills_missing_offsets_with_zeros():
    counts = (2, 1, 1)
    matrix = BlockToeplitzMatrix.from_blocks(counts, {(1, 0, 0): np.eye(2)})
    assert_allclose(matrix.block((-1, 0, 0)), np.zeros((2, 2)))
    assert_allclose(matrix.to_dense()[2:, :2], np.eye(2))
