"""
Dense and structured assembly of the Burton-Miller collocation system.
"""
import time
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from fmpbem.numerics.errors import ConfigurationError, DimensionError, MemoryCapError
from fmpbem.numerics.geometry import HalfSpace, Lattice, SurfaceMesh
from fmpbem.numerics.kernels import (IncidentField, QuadratureSettings, WaveContext, incident_values,
                                     influence_matrices)
from fmpbem.numerics.structured import (BandedBlockToeplitz, BlockHankelMatrix, BlockToeplitzMatrix,
                                        StructuredOperator)

DEFAULT_MEMORY_CAP = 8 * 1024 ** 3

# complex matrices alive at once during dense assembly (H, G and A)
_DENSE_WORKING_SET = 3


@dataclass(frozen=True, eq=False)
class DenseSystem:
    A: np.ndarray
    rhs: np.ndarray

    @property
    def storage_bytes(self) -> int:
        return int(self.A.nbytes)

    def matvec(self, p: np.ndarray) -> np.ndarray:
        return self.A @ p


def _log_performance(logger, operation: str, started: float, metadata: dict):
    if logger:
        logger.log_performance("assembly", operation, (time.perf_counter() - started) * 1000.0, metadata)


def _diagonal(ctx: WaveContext, beta: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 - 1j * ctx.alpha * ctx.k * beta)


def _system_blocks(ctx: WaveContext, h: np.ndarray, g: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """-(H + G diag(ik beta)); diagonal terms are added by the caller"""
    return -(h + g * (1j * ctx.k * beta)[None, :])


def assemble_rhs(mesh: SurfaceMesh, ctx: WaveContext, field: IncidentField) -> np.ndarray:
    p_inc, dp_inc = incident_values(field, ctx, mesh.centers, mesh.normals)
    return p_inc + ctx.alpha * dp_inc


def assemble_dense(mesh: SurfaceMesh, ctx: WaveContext, field: Optional[IncidentField] = None,
                   half_space: Optional[HalfSpace] = None,
                   settings: QuadratureSettings = QuadratureSettings(),
                   memory_cap: int = DEFAULT_MEMORY_CAP, logger=None) -> DenseSystem:
    """
    Full collocation matrix of a mesh. The half-space defaults to that of the
    incident field; without a field the right-hand side is zero.
    """
    n = mesh.n_elements
    needed = _DENSE_WORKING_SET * n * n * np.dtype(complex).itemsize
    if needed > memory_cap:
        raise MemoryCapError(f"Dense assembly of {n} unknowns needs {needed} bytes, cap is {memory_cap}")
    if half_space is None and field is not None:
        half_space = field.half_space
    started = time.perf_counter()
    h, g = influence_matrices(ctx, mesh.centers, mesh.normals, mesh, self_pairs=np.arange(n),
                              settings=settings, half_space=half_space)
    a = _system_blocks(ctx, h, g, mesh.beta)
    a[np.diag_indices(n)] += _diagonal(ctx, mesh.beta)
    rhs = assemble_rhs(mesh, ctx, field) if field is not None else np.zeros(n, dtype=complex)
    _log_performance(logger, "assemble_dense", started, {"n_dof": n, "frequency_hz": ctx.frequency})
    return DenseSystem(A=a, rhs=rhs)


def interaction_blocks(cell: SurfaceMesh, ctx: WaveContext, shifts: np.ndarray,
                       settings: QuadratureSettings = QuadratureSettings(),
                       half_space: Optional[HalfSpace] = None, image_only: bool = False) -> np.ndarray:
    """
    System blocks of the base cell acting on copies of it translated by `shifts`.

    Returns (n_shifts, b, b); the zero shift carries the self terms and the
    diagonal of the collocation system unless image_only is set.
    """
    shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
    b = cell.n_elements
    targets = (cell.centers[None, :, :] + shifts[:, None, :]).reshape(-1, 3)
    normals = np.tile(cell.normals, (shifts.shape[0], 1))
    is_zero = np.all(shifts == 0.0, axis=1)
    self_pairs = np.full(targets.shape[0], -1)
    if not image_only:
        for s in np.nonzero(is_zero)[0]:
            self_pairs[s * b:(s + 1) * b] = np.arange(b)
    h, g = influence_matrices(ctx, targets, normals, cell, self_pairs=self_pairs, settings=settings,
                              half_space=half_space, image_only=image_only)
    blocks = _system_blocks(ctx, h, g, cell.beta).reshape(shifts.shape[0], b, b)
    if not image_only:
        diagonal = _diagonal(ctx, cell.beta)
        for s in np.nonzero(is_zero)[0]:
            blocks[s][np.diag_indices(b)] += diagonal
    return blocks


def _natural_offsets(counts) -> np.ndarray:
    """All offsets (x, y, z) in natural storage order, z slowest"""
    return Lattice(counts=counts).offsets()


def check_half_space(cell: SurfaceMesh, lattice: Lattice, half_space: HalfSpace) -> None:
    """All cells must lie strictly on one side of the mirror plane"""
    axis = half_space.axis
    low, high = cell.bounding_box
    span = (lattice.counts[axis] - 1) * lattice.pitches[axis]
    below = high[axis] + span <= half_space.offset
    above = low[axis] >= half_space.offset
    if not (below or above):
        raise ConfigurationError("The lattice crosses the mirror plane")


def hankel_split(lattice: Lattice, half_space: Optional[HalfSpace]) -> bool:
    """True when the image term needs its own block Hankel matrix"""
    return half_space is not None and lattice.counts[half_space.axis] > 1


def assemble_periodic_toeplitz(cell: SurfaceMesh, lattice: Lattice, ctx: WaveContext,
                               half_space: Optional[HalfSpace] = None,
                               settings: QuadratureSettings = QuadratureSettings(),
                               logger=None) -> Tuple[BlockToeplitzMatrix, Optional[BlockHankelMatrix]]:
    """
    Unique blocks of the periodic system.

    With a mirror plane parallel to every periodic axis the image term folds
    into the Toeplitz blocks; otherwise the image term is returned as a block
    Hankel matrix over the mirrored axis.
    """
    lattice.check_cell(cell)
    if half_space is not None:
        check_half_space(cell, lattice, half_space)
    started = time.perf_counter()
    counts = lattice.counts
    offsets = _natural_offsets(counts)
    dims = tuple(2 * m - 1 for m in reversed(counts))
    b = cell.n_elements
    split = hankel_split(lattice, half_space)

    direct = interaction_blocks(cell, ctx, lattice.offset_vector(offsets), settings,
                                half_space=None if split else half_space)
    toeplitz = BlockToeplitzMatrix(counts=counts, blocks=direct.reshape(dims + (b, b)))

    hankel = None
    if split:
        axis = half_space.axis
        index = offsets.copy()
        # along the mirrored axis the natural index is the cell index sum
        index[:, axis] += counts[axis] - 1
        image = interaction_blocks(cell, ctx, lattice.offset_vector(index), settings,
                                   half_space=half_space, image_only=True)
        hankel = BlockHankelMatrix(counts=counts, blocks=image.reshape(dims + (b, b)), axis=axis)
    _log_performance(logger, "assemble_periodic_toeplitz", started,
                     {"counts": list(counts), "n_dof": b, "unique_blocks": len(offsets),
                      "hankel": hankel is not None, "frequency_hz": ctx.frequency})
    return toeplitz, hankel


def expand_dense(toeplitz: Union[BlockToeplitzMatrix, BandedBlockToeplitz],
                 hankel: Optional[BlockHankelMatrix] = None) -> np.ndarray:
    dense = toeplitz.to_dense()
    if hankel is not None:
        dense_h = hankel.to_dense()
        if dense_h.shape != dense.shape:
            raise DimensionError("Toeplitz and Hankel parts disagree in shape")
        dense = dense + dense_h
    return dense


def storage_bytes(matrix) -> int:
    """Bytes held by an assembled operator"""
    if isinstance(matrix, np.ndarray):
        return int(matrix.nbytes)
    if isinstance(matrix, (tuple, list)):
        return sum(storage_bytes(m) for m in matrix if m is not None)
    if hasattr(matrix, "storage_bytes"):
        return int(matrix.storage_bytes)
    raise TypeError(f"Cannot size objects of type {type(matrix).__name__}")


def periodic_operator(cell: SurfaceMesh, lattice: Lattice, ctx: WaveContext,
                      half_space: Optional[HalfSpace] = None,
                      settings: QuadratureSettings = QuadratureSettings(),
                      workers: Optional[int] = None, logger=None) -> StructuredOperator:
    """PBEM operator: assemble the unique blocks and keep only their spectra"""
    toeplitz, hankel = assemble_periodic_toeplitz(cell, lattice, ctx, half_space, settings, logger=logger)
    started = time.perf_counter()
    operator = StructuredOperator.from_matrices(toeplitz, hankel, workers=workers)
    _log_performance(logger, "spectrum", started, {"storage_bytes": operator.storage_bytes})
    return operator
