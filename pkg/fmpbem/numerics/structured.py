"""
Multilevel block Toeplitz, Hankel and circulant algebra over a lattice.

Blocks are stored in an array of shape (2Mz-1, 2My-1, 2Mx-1, b_out, b_in)
indexed in natural order: offset o along an axis sits at o + M - 1. Block
Hankel matrices use the same array with the mirrored axis indexed by the
cell index sum. Vectors are laid out cell-major, p.reshape(Mz, My, Mx, b).
"""
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Optional, Tuple

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator

from fmpbem.numerics.errors import ConfigurationError, DimensionError

Offset = Tuple[int, int, int]


def _counts_zyx(counts) -> Tuple[int, int, int]:
    mx, my, mz = (int(c) for c in counts)
    return mz, my, mx


def _natural_index(offset: Offset, counts) -> Tuple[int, int, int]:
    """Array position (z, y, x) of a lattice offset given as (x, y, z)"""
    for o, m in zip(offset, counts):
        if not 1 - m <= o <= m - 1:
            raise DimensionError(f"Offset {offset} outside the lattice {counts}")
    return tuple(int(o) + int(m) - 1 for o, m in zip(reversed(offset), reversed(counts)))


def _active_axes(counts) -> Tuple[int, ...]:
    """Array axes (0=z, 1=y, 2=x) carrying more than one cell"""
    return tuple(axis for axis, m in enumerate(_counts_zyx(counts)) if m > 1)


def _cell_grid(vector: np.ndarray, counts, width: int) -> np.ndarray:
    n_cells = int(np.prod(counts))
    vector = np.asarray(vector)
    if vector.shape != (n_cells * width,):
        raise DimensionError(f"Vector of length {vector.shape} does not match {n_cells} cells of size {width}")
    return vector.reshape(*_counts_zyx(counts), width)


@dataclass(frozen=True, eq=False)
class BlockToeplitzMatrix:
    """Multilevel block Toeplitz matrix stored by its unique blocks"""
    counts: Tuple[int, int, int]
    blocks: np.ndarray

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        expected = tuple(2 * m - 1 for m in _counts_zyx(counts))
        if self.blocks.ndim != 5 or self.blocks.shape[:3] != expected:
            raise DimensionError(f"Block array of shape {self.blocks.shape} does not match counts {counts}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_blocks(cls, counts, blocks: Dict[Offset, np.ndarray], shape: Optional[Tuple[int, int]] = None):
        """Build from an offset -> block mapping; missing offsets are zero blocks"""
        if shape is None:
            shape = next(iter(blocks.values())).shape
        array = np.zeros(tuple(2 * m - 1 for m in _counts_zyx(counts)) + tuple(shape), dtype=complex)
        for offset, block in blocks.items():
            array[_natural_index(offset, counts)] = block
        return cls(counts=tuple(counts), blocks=array)

    @property
    def block_shape(self) -> Tuple[int, int]:
        return self.blocks.shape[3], self.blocks.shape[4]

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    @property
    def shape(self) -> Tuple[int, int]:
        b_out, b_in = self.block_shape
        return self.n_cells * b_out, self.n_cells * b_in

    @property
    def storage_bytes(self) -> int:
        return int(self.blocks.nbytes)

    def block(self, offset: Offset) -> np.ndarray:
        return self.blocks[_natural_index(offset, self.counts)]

    def offsets(self) -> Iterator[Offset]:
        mz, my, mx = _counts_zyx(self.counts)
        for oz in range(1 - mz, mz):
            for oy in range(1 - my, my):
                for ox in range(1 - mx, mx):
                    yield ox, oy, oz

    def to_dense(self) -> np.ndarray:
        return _expand(self.blocks, self.counts, hankel_axis=None)


@dataclass(frozen=True, eq=False)
class BlockHankelMatrix:
    """
    Block matrix that is Hankel along one lattice axis (blocks depend on the
    cell index sum) and Toeplitz along the others.
    """
    counts: Tuple[int, int, int]
    blocks: np.ndarray
    axis: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        expected = tuple(2 * m - 1 for m in _counts_zyx(counts))
        if self.blocks.ndim != 5 or self.blocks.shape[:3] != expected:
            raise DimensionError(f"Block array of shape {self.blocks.shape} does not match counts {counts}")
        if self.axis not in (0, 1, 2):
            raise ConfigurationError(f"Hankel axis must be 0, 1 or 2, got {self.axis}")
        object.__setattr__(self, "counts", counts)

    @property
    def block_shape(self) -> Tuple[int, int]:
        return self.blocks.shape[3], self.blocks.shape[4]

    @property
    def storage_bytes(self) -> int:
        return int(self.blocks.nbytes)

    def block(self, index: Offset) -> np.ndarray:
        """Block at (offset, offset, index sum) with the sum taken along the Hankel axis"""
        shifted = list(index)
        shifted[self.axis] -= self.counts[self.axis] - 1
        return self.blocks[_natural_index(tuple(shifted), self.counts)]

    def permutation(self) -> "PermutationMap":
        return PermutationMap(counts=self.counts, axis=self.axis)

    def permuted(self) -> BlockToeplitzMatrix:
        """T_hat P as a block Toeplitz matrix; it shares the block array"""
        return BlockToeplitzMatrix(counts=self.counts, blocks=self.blocks)

    def to_dense(self) -> np.ndarray:
        return _expand(self.blocks, self.counts, hankel_axis=self.axis)


def _expand(blocks: np.ndarray, counts, hankel_axis: Optional[int]) -> np.ndarray:
    mx, my, mz = counts
    l, j, i = np.meshgrid(np.arange(mz), np.arange(my), np.arange(mx), indexing="ij")
    cells = np.stack([i.ravel(), j.ravel(), l.ravel()], axis=1)
    index = cells[:, None, :] - cells[None, :, :] + (np.asarray(counts) - 1)
    if hankel_axis is not None:
        index[..., hankel_axis] = cells[:, None, hankel_axis] + cells[None, :, hankel_axis]
    gathered = blocks[index[..., 2], index[..., 1], index[..., 0]]
    n_cells = cells.shape[0]
    b_out, b_in = blocks.shape[3], blocks.shape[4]
    return gathered.transpose(0, 2, 1, 3).reshape(n_cells * b_out, n_cells * b_in)


@dataclass(frozen=True)
class PermutationMap:
    """Reversal of the cell index along one lattice axis; an involution"""
    counts: Tuple[int, int, int]
    axis: int

    @property
    def indices(self) -> np.ndarray:
        cells = np.arange(int(np.prod(self.counts))).reshape(_counts_zyx(self.counts))
        return np.flip(cells, axis=2 - self.axis).ravel()

    def apply(self, vector: np.ndarray, width: int) -> np.ndarray:
        grid = _cell_grid(vector, self.counts, width)
        return np.flip(grid, axis=2 - self.axis).reshape(-1)


@dataclass(frozen=True, eq=False)
class CirculantSpectrum:
    """Blockwise DFT of the circulant embedding over the active lattice axes"""
    counts: Tuple[int, int, int]
    blocks: np.ndarray

    @property
    def block_shape(self) -> Tuple[int, int]:
        return self.blocks.shape[3], self.blocks.shape[4]

    @property
    def storage_bytes(self) -> int:
        return int(self.blocks.nbytes)


def circulant_embed(matrix: BlockToeplitzMatrix) -> np.ndarray:
    """First block column of the circulant: per axis offsets 0, 1, .., M-1, 1-M, .., -1"""
    return scipy.fft.ifftshift(matrix.blocks, axes=(0, 1, 2))


def spectrum(column: np.ndarray, counts, workers: Optional[int] = None) -> CirculantSpectrum:
    counts = tuple(int(c) for c in counts)
    axes = _active_axes(counts)
    blocks = np.asarray(column, dtype=complex)
    if axes:
        blocks = scipy.fft.fftn(blocks, axes=axes, workers=workers)
    return CirculantSpectrum(counts=counts, blocks=blocks)


def toeplitz_matvec(spec: CirculantSpectrum, p: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    """T p through zero-padding, DFT, blockwise multiply, inverse DFT and truncation"""
    counts = spec.counts
    b_out, b_in = spec.block_shape
    grid = _cell_grid(p, counts, b_in)
    axes = _active_axes(counts)
    if not axes:
        return (grid.reshape(-1, b_in) @ spec.blocks[0, 0, 0].T).reshape(-1)
    sizes = [spec.blocks.shape[a] for a in axes]
    transformed = scipy.fft.fftn(grid, s=sizes, axes=axes, workers=workers)
    product = np.einsum("zyxoi,zyxi->zyxo", spec.blocks, transformed)
    result = scipy.fft.ifftn(product, axes=axes, workers=workers)
    mz, my, mx = _counts_zyx(counts)
    return result[:mz, :my, :mx].reshape(-1)


def hankel_matvec(spec: CirculantSpectrum, perm: PermutationMap, p: np.ndarray,
                  workers: Optional[int] = None) -> np.ndarray:
    """T_hat p = (T_hat P)(P p), given the spectrum of T_hat P"""
    return toeplitz_matvec(spec, perm.apply(p, spec.block_shape[1]), workers=workers)


@dataclass(frozen=True, eq=False)
class BandedBlockToeplitz:
    """Block Toeplitz matrix with nonzero blocks at a sparse set of offsets"""
    counts: Tuple[int, int, int]
    blocks: Dict[Offset, np.ndarray]
    block_shape: Tuple[int, int]

    @property
    def storage_bytes(self) -> int:
        return int(sum(b.nbytes for b in self.blocks.values()))

    def matvec(self, p: np.ndarray) -> np.ndarray:
        b_out, b_in = self.block_shape
        grid = _cell_grid(p, self.counts, b_in)
        dims = _counts_zyx(self.counts)
        result = np.zeros(dims + (b_out,), dtype=complex)
        for offset, block in self.blocks.items():
            target, source = [], []
            for o, m in zip(reversed(offset), dims):
                lo, hi = max(0, o), min(m, m + o)
                if lo >= hi:
                    break
                target.append(slice(lo, hi))
                source.append(slice(lo - o, hi - o))
            else:
                result[tuple(target)] += np.einsum("oi,zyxi->zyxo", block, grid[tuple(source)])
        return result.reshape(-1)

    def to_dense(self) -> np.ndarray:
        return BlockToeplitzMatrix.from_blocks(self.counts, self.blocks, self.block_shape).to_dense()


@dataclass(frozen=True, eq=False)
class StructuredOperator:
    """
    Matrix-free (T + T_hat) operator: the Toeplitz part and the optional
    Hankel part are applied through their circulant spectra.
    """
    toeplitz: CirculantSpectrum
    hankel: Optional[CirculantSpectrum] = None
    permutation: Optional[PermutationMap] = None
    workers: Optional[int] = None

    @classmethod
    def from_matrices(cls, toeplitz: BlockToeplitzMatrix, hankel: Optional[BlockHankelMatrix] = None,
                      workers: Optional[int] = None) -> "StructuredOperator":
        t_spec = spectrum(circulant_embed(toeplitz), toeplitz.counts, workers=workers)
        if hankel is None:
            return cls(toeplitz=t_spec, workers=workers)
        h_spec = spectrum(circulant_embed(hankel.permuted()), hankel.counts, workers=workers)
        return cls(toeplitz=t_spec, hankel=h_spec, permutation=hankel.permutation(), workers=workers)

    @property
    def size(self) -> int:
        return int(np.prod(self.toeplitz.counts)) * self.toeplitz.block_shape[0]

    @property
    def storage_bytes(self) -> int:
        total = self.toeplitz.storage_bytes
        if self.hankel is not None:
            total += self.hankel.storage_bytes
        return total

    def matvec(self, p: np.ndarray) -> np.ndarray:
        result = toeplitz_matvec(self.toeplitz, p, workers=self.workers)
        if self.hankel is not None:
            result = result + hankel_matvec(self.hankel, self.permutation, p, workers=self.workers)
        return result

    def as_linear_operator(self) -> LinearOperator:
        return as_linear_operator(self.matvec, self.size)


def as_linear_operator(matvec: Callable[[np.ndarray], np.ndarray], size: int) -> LinearOperator:
    return LinearOperator((size, size), matvec=lambda v: matvec(np.asarray(v).reshape(-1)), dtype=complex)
