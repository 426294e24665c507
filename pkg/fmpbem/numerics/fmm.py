"""
Single-level periodic fast multipole operators.

One box per lattice cell. The far field of the collocation system is
U0 K V0: V0 maps element pressures of a cell to its moments
M_n^m = int conj(I_n^m(y - c)) [d/dn_y + ik beta] p dGamma, K holds the M2L
translations between admissible boxes and U0 evaluates the local expansion
with the Burton-Miller operator (1 + alpha d/dn_x) at the collocation points.
P2M and L2P are shared by all cells, so only the M2L bank depends on the
lattice offset and it is applied through its circulant spectrum.
"""
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from fmpbem.numerics.assembly import (assemble_rhs, hankel_split, check_half_space, interaction_blocks,
                                      periodic_operator)
from fmpbem.numerics.errors import ConfigurationError, DimensionError, DomainError
from fmpbem.numerics.geometry import (ADMISSIBILITY_RTOL, HalfSpace, Lattice, SurfaceMesh, box_grid,
                                      replicate_lattice)
from fmpbem.numerics.kernels import FOUR_PI, IncidentField, QuadratureSettings, WaveContext
from fmpbem.numerics.postproc import relative_error
from fmpbem.numerics.solver import gmres
from fmpbem.numerics.specfun import (addition_coefficient, coupling_degrees, flatten_index, harmonic_count,
                                     harmonic_table, regular_solid_harmonics, regular_solid_harmonics_gradient,
                                     singular_solid_harmonics)
from fmpbem.numerics.structured import (BandedBlockToeplitz, BlockToeplitzMatrix, CirculantSpectrum,
                                        PermutationMap, as_linear_operator, circulant_embed, hankel_matvec,
                                        spectrum, toeplitz_matvec)

MAX_TRUNCATION = 30


@dataclass(frozen=True)
class FmmConfig:
    n_t: int = 4
    # truncation of re-centered (M2M, L2L) expansions; the single-level operators only use n_t
    n_t_near: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.n_t <= MAX_TRUNCATION:
            raise ConfigurationError(f"Truncation n_t must be in [0, {MAX_TRUNCATION}], got {self.n_t}")
        if self.n_t_near is not None and not 0 <= self.n_t_near <= MAX_TRUNCATION:
            raise ConfigurationError(f"Truncation n_t_near must be in [0, {MAX_TRUNCATION}], got {self.n_t_near}")

    @property
    def translation_order(self) -> int:
        return self.n_t if self.n_t_near is None else self.n_t_near


@dataclass(frozen=True, eq=False)
class MultipoleCoefficients:
    """Expansion coefficients about `center`, flattened by n*n + n + m"""
    center: np.ndarray
    n_t: int
    coeffs: np.ndarray
    k: float

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != harmonic_count(self.n_t):
            raise DimensionError(f"Expected {harmonic_count(self.n_t)} coefficients, got {coeffs.shape[0]}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))


# local expansions carry the same data
LocalCoefficients = MultipoleCoefficients


# ----------------------------------------------------------------------
# Translation operators
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _translation_terms(n_t: int, kind: str):
    """
    Sparse description of a translation matrix: entry (row, col) collects
    coef * F_l^mu(D) over its terms, with F = O for M2L and I otherwise.
    """
    degrees, orders = harmonic_table(n_t)
    size = harmonic_count(n_t)
    rows, cols, harmonics, coefs = [], [], [], []
    for row in range(size):
        n, m = int(degrees[row]), int(orders[row])
        for col in range(size):
            n_src, m_src = int(degrees[col]), int(orders[col])
            if kind == "m2l":
                mu = m + m_src
            elif kind == "l2l":
                mu = m - m_src
            else:
                mu = m_src - m
            for l in coupling_degrees(n, n_src, mu):
                if kind == "m2l":
                    c = addition_coefficient(n_src, m_src, n, m, l)
                elif kind == "l2l":
                    c = addition_coefficient(n_src, m_src, n, -m, l)
                else:
                    c = addition_coefficient(n, m, n_src, -m_src, l)
                if c == 0.0:
                    continue
                rows.append(row)
                cols.append(col)
                harmonics.append(flatten_index(l, mu))
                coefs.append((2 * n_src + 1) * c)
    positions = np.asarray(rows) * size + np.asarray(cols)
    n_terms = len(coefs)
    scatter = sparse.csr_matrix((np.ones(n_terms), (positions, np.arange(n_terms))), shape=(size * size, n_terms))
    return scatter, np.asarray(harmonics, dtype=int), np.asarray(coefs)


def translation_matrices(kind: str, n_t: int, displacements: np.ndarray, k: float) -> np.ndarray:
    """Translation matrices (count, B, B) of kind 'm2l', 'm2m' or 'l2l' for each displacement"""
    if kind not in ("m2l", "m2m", "l2l"):
        raise DomainError(f"Unknown translation kind {kind}")
    displacements = np.atleast_2d(np.asarray(displacements, dtype=float))
    scatter, harmonics, coefs = _translation_terms(n_t, kind)
    if kind == "m2l":
        values = singular_solid_harmonics(2 * n_t, displacements, k)
    else:
        values = regular_solid_harmonics(2 * n_t, displacements, k)
    terms = values[:, harmonics] * coefs[None, :]
    size = harmonic_count(n_t)
    return np.asarray(scatter @ terms.T).T.reshape(-1, size, size)


def m2l_block(delta, ctx: WaveContext, n_t: int, radius: float) -> np.ndarray:
    """M2L matrix for target center minus source center `delta` between boxes of size `radius`"""
    if radius <= 0:
        raise DomainError(f"Box size must be positive, got {radius}")
    delta = np.asarray(delta, dtype=float).reshape(3)
    if np.linalg.norm(delta) < 2.0 * radius * (1.0 - ADMISSIBILITY_RTOL):
        raise DomainError(f"Boxes at distance {np.linalg.norm(delta)} are not admissible for r = {radius}")
    return translation_matrices("m2l", n_t, delta, ctx.k)[0]


def _output_order(src: MultipoleCoefficients, n_t: Optional[int]) -> int:
    if n_t is None:
        return src.n_t
    if not 0 <= n_t <= src.n_t:
        raise DomainError(f"Translated truncation must be in [0, {src.n_t}], got {n_t}")
    return n_t


def m2m_translate(src: MultipoleCoefficients, new_center, n_t: Optional[int] = None) -> MultipoleCoefficients:
    """
    Re-center a multipole expansion. With n_t the result keeps degrees up
    to n_t only (FmmConfig.translation_order); every input degree contributes.
    """
    new_center = np.asarray(new_center, dtype=float).reshape(3)
    n_out = _output_order(src, n_t)
    shift = translation_matrices("m2m", src.n_t, src.center - new_center, src.k)[0]
    coeffs = (shift @ src.coeffs)[:harmonic_count(n_out)]
    return MultipoleCoefficients(center=new_center, n_t=n_out, coeffs=coeffs, k=src.k)


def l2l_translate(src: LocalCoefficients, new_center, n_t: Optional[int] = None) -> LocalCoefficients:
    new_center = np.asarray(new_center, dtype=float).reshape(3)
    n_out = _output_order(src, n_t)
    shift = translation_matrices("l2l", src.n_t, new_center - src.center, src.k)[0]
    coeffs = (shift @ src.coeffs)[:harmonic_count(n_out)]
    return LocalCoefficients(center=new_center, n_t=n_out, coeffs=coeffs, k=src.k)


def p2m_matrix(cell: SurfaceMesh, ctx: WaveContext, n_t: int, center,
               settings: QuadratureSettings = QuadratureSettings()) -> np.ndarray:
    """V0 of shape (B, n_dof): moments of [d/dn_y + ik beta] applied to the element pressures"""
    points, weights = cell.gauss_rule(settings.order)
    n_elem, n_q = weights.shape
    rel = points.reshape(-1, 3) - np.asarray(center, dtype=float)
    values, grads = regular_solid_harmonics_gradient(n_t, rel, ctx.k)
    values = np.conj(values).reshape(n_elem, n_q, -1)
    grads = np.conj(grads).reshape(n_elem, n_q, -1, 3)
    normal_part = np.einsum("eqbi,ei->eqb", grads, cell.normals)
    integrand = normal_part + (1j * ctx.k * cell.beta)[:, None, None] * values
    return np.einsum("eqb,eq->be", integrand, weights)


def l2p_matrix(cell: SurfaceMesh, ctx: WaveContext, n_t: int, center) -> np.ndarray:
    """U0 of shape (n_dof, B): minus the Burton-Miller evaluation of the local expansion"""
    rel = cell.centers - np.asarray(center, dtype=float)
    values, grads = regular_solid_harmonics_gradient(n_t, rel, ctx.k)
    values, grads = np.conj(values), np.conj(grads)
    degrees, _ = harmonic_table(n_t)
    combined = values + ctx.alpha * np.einsum("ebi,ei->eb", grads, cell.normals)
    return -(1j * ctx.k / FOUR_PI) * (2 * degrees + 1)[None, :] * combined


# ----------------------------------------------------------------------
# Periodic operators
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FmmOperators:
    """
    Near field S, shared U0 / V0 and the M2L spectrum; hatted members carry
    the image path when the mirrored axis is periodic.
    """
    counts: Tuple[int, int, int]
    S: BandedBlockToeplitz
    U0: np.ndarray
    V0: np.ndarray
    K_spectrum: CirculantSpectrum
    near_offsets: List[Tuple[int, int, int]]
    far_offsets: List[Tuple[int, int, int]]
    S_hat: Optional[BandedBlockToeplitz] = None
    V_hat: Optional[np.ndarray] = None
    K_hat_spectrum: Optional[CirculantSpectrum] = None
    permutation: Optional[PermutationMap] = None
    workers: Optional[int] = None

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    @property
    def size(self) -> int:
        return self.n_cells * self.U0.shape[0]

    @property
    def U_hat(self) -> Optional[np.ndarray]:
        return self.U0 if self.V_hat is not None else None

    @property
    def storage_bytes(self) -> int:
        parts = [self.S.storage_bytes, self.U0.nbytes, self.V0.nbytes, self.K_spectrum.storage_bytes]
        if self.V_hat is not None:
            parts += [self.S_hat.storage_bytes, self.V_hat.nbytes, self.K_hat_spectrum.storage_bytes]
        return int(sum(parts))

    def matvec(self, p: np.ndarray) -> np.ndarray:
        return fmm_matvec(self, p)

    def as_linear_operator(self):
        return as_linear_operator(self.matvec, self.size)


def _far_path(ops: FmmOperators, cells: np.ndarray, v: np.ndarray, spec: CirculantSpectrum,
              permutation: Optional[PermutationMap]) -> np.ndarray:
    moments = (cells @ v.T).reshape(-1)
    if permutation is None:
        local = toeplitz_matvec(spec, moments, workers=ops.workers)
    else:
        local = hankel_matvec(spec, permutation, moments, workers=ops.workers)
    return (local.reshape(ops.n_cells, -1) @ ops.U0.T).reshape(-1)


def fmm_matvec(ops: FmmOperators, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p)
    if p.shape != (ops.size,):
        raise DimensionError(f"Vector of shape {p.shape} does not match the operator size {ops.size}")
    b = ops.U0.shape[0]
    cells = p.reshape(ops.n_cells, b)
    result = ops.S.matvec(p) + _far_path(ops, cells, ops.V0, ops.K_spectrum, None)
    if ops.V_hat is not None:
        result = result + ops.S_hat.matvec(ops.permutation.apply(p, b))
        result = result + _far_path(ops, cells, ops.V_hat, ops.K_hat_spectrum, ops.permutation)
    return result


def _admissible_mask(deltas: np.ndarray, radius: float) -> np.ndarray:
    return np.linalg.norm(deltas, axis=1) >= 2.0 * radius * (1.0 - ADMISSIBILITY_RTOL)


def _as_keys(offsets: np.ndarray) -> List[Tuple[int, int, int]]:
    return [tuple(int(o) for o in row) for row in offsets]


def _near_blocks(cell, ctx, lattice, offsets, settings, half_space=None, image_only=False):
    if len(offsets) == 0:
        return {}
    blocks = interaction_blocks(cell, ctx, lattice.offset_vector(offsets), settings,
                                half_space=half_space, image_only=image_only)
    return dict(zip(_as_keys(offsets), blocks))


def _m2l_bank(counts, deltas: np.ndarray, mask: np.ndarray, ctx: WaveContext, n_t: int) -> np.ndarray:
    size = harmonic_count(n_t)
    dims = tuple(2 * m - 1 for m in reversed(counts))
    bank = np.zeros((deltas.shape[0], size, size), dtype=complex)
    if np.any(mask):
        bank[mask] = translation_matrices("m2l", n_t, deltas[mask], ctx.k)
    return bank.reshape(dims + (size, size))


def _merge(first: Dict, second: Dict) -> Dict:
    merged = dict(first)
    for key, block in second.items():
        merged[key] = merged[key] + block if key in merged else block
    return merged


def assemble_periodic_fmm(cell: SurfaceMesh, lattice: Lattice, ctx: WaveContext, cfg: FmmConfig = FmmConfig(),
                          half_space: Optional[HalfSpace] = None,
                          settings: QuadratureSettings = QuadratureSettings(),
                          workers: Optional[int] = None, logger=None) -> FmmOperators:
    lattice.check_cell(cell)
    if half_space is not None:
        check_half_space(cell, lattice, half_space)
    started = time.perf_counter()
    counts = lattice.counts
    n_t = cfg.n_t
    grid = box_grid(cell, lattice)
    center = grid.base_center
    offsets = lattice.offsets()
    deltas = lattice.offset_vector(offsets)
    far = _admissible_mask(deltas, grid.radius)

    u0 = l2p_matrix(cell, ctx, n_t, center)
    v0 = p2m_matrix(cell, ctx, n_t, center, settings)
    near_blocks = _near_blocks(cell, ctx, lattice, offsets[~far], settings)
    bank = _m2l_bank(counts, deltas, far, ctx, n_t)
    near_keys = set(_as_keys(offsets[~far]))

    hatted = {}
    if half_space is not None:
        image_center = half_space.mirror(center)
        image_v0 = half_space.reflection * p2m_matrix(cell.mirrored(half_space), ctx, n_t, image_center, settings)
        if hankel_split(lattice, half_space):
            axis = half_space.axis
            index = offsets.copy()
            index[:, axis] += counts[axis] - 1
            image_deltas = center + lattice.offset_vector(index) - image_center
            image_far = _admissible_mask(image_deltas, grid.radius)
            # the near image blocks are stored permuted, keyed by the Toeplitz offset of T_hat P
            image_blocks = interaction_blocks(cell, ctx, lattice.offset_vector(index[~image_far]), settings,
                                              half_space=half_space, image_only=True)
            hatted = dict(
                S_hat=BandedBlockToeplitz(counts=counts, blocks=dict(zip(_as_keys(offsets[~image_far]), image_blocks)),
                                          block_shape=(cell.n_elements, cell.n_elements)),
                V_hat=image_v0,
                K_hat_spectrum=spectrum(circulant_embed(BlockToeplitzMatrix(
                    counts=counts, blocks=_m2l_bank(counts, image_deltas, image_far, ctx, n_t))), counts,
                    workers=workers),
                permutation=PermutationMap(counts=counts, axis=axis),
            )
        else:
            image_deltas = center + deltas - image_center
            image_far = _admissible_mask(image_deltas, grid.radius)
            near_blocks = _merge(near_blocks, _near_blocks(cell, ctx, lattice, offsets[~image_far], settings,
                                                           half_space=half_space, image_only=True))
            near_keys |= set(_as_keys(offsets[~image_far]))
            v0 = np.vstack([v0, image_v0])
            bank = np.concatenate([bank, _m2l_bank(counts, image_deltas, image_far, ctx, n_t)], axis=-1)

    near_offsets = [key for key in _as_keys(offsets) if key in near_keys]
    far_offsets = [key for key, is_far in zip(_as_keys(offsets), far) if is_far]
    ops = FmmOperators(
        counts=counts,
        S=BandedBlockToeplitz(counts=counts, blocks=near_blocks, block_shape=(cell.n_elements, cell.n_elements)),
        U0=u0,
        V0=v0,
        K_spectrum=spectrum(circulant_embed(BlockToeplitzMatrix(counts=counts, blocks=bank)), counts,
                            workers=workers),
        near_offsets=near_offsets,
        far_offsets=far_offsets,
        workers=workers,
        **hatted,
    )
    if logger:
        logger.log_performance("fmm", "assemble_periodic_fmm", (time.perf_counter() - started) * 1000.0,
                               {"counts": list(counts), "n_t": n_t, "near_offsets": len(near_offsets),
                                "far_offsets": len(far_offsets), "hatted": ops.V_hat is not None,
                                "storage_bytes": ops.storage_bytes, "frequency_hz": ctx.frequency})
    return ops


def truncation_study(cell: SurfaceMesh, lattice: Lattice, ctx: WaveContext, field: IncidentField,
                     n_t_values: Sequence[int], reference: Optional[np.ndarray] = None,
                     half_space: Optional[HalfSpace] = None,
                     settings: QuadratureSettings = QuadratureSettings(),
                     tol: float = 1e-14, restart: int = 100, max_iter: int = 1000,
                     logger=None) -> Dict[int, float]:
    """Relative l2 error of the FMPBEM solution against a PBEM reference for each truncation"""
    if half_space is None:
        half_space = field.half_space
    rhs = assemble_rhs(replicate_lattice(cell, lattice), ctx, field)
    if reference is None:
        pbem = periodic_operator(cell, lattice, ctx, half_space, settings, logger=logger)
        reference = gmres(pbem.matvec, rhs, tol=tol, restart=restart, max_iter=max_iter, logger=logger).solution
    errors = {}
    for n_t in n_t_values:
        ops = assemble_periodic_fmm(cell, lattice, ctx, FmmConfig(n_t=n_t), half_space, settings, logger=logger)
        report = gmres(ops.matvec, rhs, tol=tol, restart=restart, max_iter=max_iter, logger=logger)
        errors[int(n_t)] = relative_error(report.solution, reference)
        if logger:
            logger.log_info(f"Truncation n_t={n_t}: relative error {errors[int(n_t)]:.3e}", "fmm",
                            {"n_t": int(n_t), "relative_error": errors[int(n_t)],
                             "iterations": report.iterations})
    return errors
