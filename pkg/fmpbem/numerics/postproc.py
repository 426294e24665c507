"""
Field evaluation, insertion loss, Bragg frequency and the rigid-sphere
partial-wave reference solution.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special
from scipy.spatial.distance import cdist

from fmpbem.numerics.errors import ConvergenceError, DimensionError, DomainError
from fmpbem.numerics.geometry import HalfSpace, SurfaceMesh
from fmpbem.numerics.kernels import IncidentField, QuadratureSettings, WaveContext, incident_values, influence_matrices

SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 200


@dataclass(frozen=True, eq=False)
class ObservationGrid:
    points: np.ndarray
    label: str = "observation"
    shape: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[1] != 3:
            raise DimensionError(f"Observation points must be 3-vectors, got shape {points.shape}")
        object.__setattr__(self, "points", points)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def observation_grid(origin, edge_u, edge_v, counts: Tuple[int, int] = (40, 80),
                     label: str = "observation") -> ObservationGrid:
    """Uniform grid spanning the rectangle origin + [0,1] edge_u + [0,1] edge_v, edges included"""
    origin, edge_u, edge_v = (np.asarray(a, dtype=float).reshape(3) for a in (origin, edge_u, edge_v))
    nu, nv = (int(c) for c in counts)
    if nu < 1 or nv < 1:
        raise DomainError(f"Grid counts must be positive, got {counts}")
    a = np.linspace(0.0, 1.0, nu) if nu > 1 else np.zeros(1)
    b = np.linspace(0.0, 1.0, nv) if nv > 1 else np.zeros(1)
    points = origin + a[:, None, None] * edge_u + b[None, :, None] * edge_v
    return ObservationGrid(points=points.reshape(-1, 3), label=label, shape=(nu, nv))


def evaluate_field(mesh: SurfaceMesh, p: np.ndarray, ctx: WaveContext, field: IncidentField, points,
                   half_space: Optional[HalfSpace] = None,
                   settings: QuadratureSettings = QuadratureSettings(), logger=None) -> np.ndarray:
    """
    Total pressure at exterior points from the representation formula
    p(x) = p_inc(x) + int [dG/dn_y + ik beta G] p dGamma.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(p, dtype=complex).reshape(-1)
    if p.shape[0] != mesh.n_elements:
        raise DimensionError(f"Surface solution of length {p.shape[0]} does not match {mesh.n_elements} elements")
    if half_space is None:
        half_space = field.half_space
    clearance = cdist(points, mesh.centers) < mesh.diameters[None, :]
    if logger and np.any(clearance):
        close = int(np.count_nonzero(clearance.any(axis=1)))
        logger.log_warning(f"{close} observation points lie within one element diameter of the surface",
                           "postproc", {"points": close})
    h, g = influence_matrices(ctx, points, np.zeros_like(points), mesh, settings=settings, alpha=0.0,
                              half_space=half_space)
    p_inc, _ = incident_values(field, ctx, points, np.zeros_like(points))
    return p_inc + (h + g * (1j * ctx.k * mesh.beta)[None, :]) @ p


def insertion_loss(p_inc_values, p_values) -> float:
    """20 log10(sum |p_inc| / sum |p|) in dB"""
    p_inc_values = np.asarray(p_inc_values).reshape(-1)
    p_values = np.asarray(p_values).reshape(-1)
    if p_inc_values.shape != p_values.shape:
        raise DimensionError("Incident and total pressure sets differ in length")
    if p_values.size == 0:
        raise DomainError("Insertion loss needs at least one observation point")
    total = np.sum(np.abs(p_values))
    if total == 0.0:
        raise DomainError("Total pressure vanishes everywhere; insertion loss is infinite")
    return float(20.0 * np.log10(np.sum(np.abs(p_inc_values)) / total))


def bragg_frequency(c: float, d: float, theta: float = np.pi / 2, n: int = 1) -> float:
    if not 0.0 < theta <= np.pi / 2:
        raise DomainError(f"Bragg angle must lie in (0, pi/2], got {theta}")
    if d <= 0 or n < 1:
        raise DomainError("Bragg frequency needs d > 0 and n >= 1")
    return n * c / (2.0 * d * np.sin(theta))


def rigid_sphere_reference(ctx: WaveContext, radius: float, p0: complex = 1.0, points=None,
                           theta=None, direction=(1.0, 0.0, 0.0), center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """
    Total pressure of a plane wave p0 e^{ik d.x} scattered by a rigid sphere.

    Evaluate at exterior `points` or at surface polar angles `theta`
    measured from the propagation direction.
    """
    ka = ctx.k * radius
    if ka > 20:
        raise DomainError(f"Partial-wave reference limited to ka <= 20, got {ka}")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    if points is not None:
        rel = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(center, dtype=float)
        r = np.linalg.norm(rel, axis=1)
        if np.any(r < radius * (1.0 - 1e-12)):
            raise DomainError("Reference points must lie on or outside the sphere")
        cos_gamma = np.clip(rel @ direction / r, -1.0, 1.0)
    elif theta is not None:
        cos_gamma = np.cos(np.atleast_1d(np.asarray(theta, dtype=float)))
        r = np.full(cos_gamma.shape, radius)
    else:
        raise DomainError("Provide either points or theta")

    kr = ctx.k * r
    total = np.zeros(cos_gamma.shape, dtype=complex)
    for n in range(SERIES_MAX_TERMS):
        dh = special.spherical_jn(n, ka, derivative=True) + 1j * special.spherical_yn(n, ka, derivative=True)
        ratio = special.spherical_jn(n, ka, derivative=True) / dh
        hn = special.spherical_jn(n, kr) + 1j * special.spherical_yn(n, kr)
        radial = (2 * n + 1) * (special.spherical_jn(n, kr) - ratio * hn)
        total += (1j ** n) * radial * special.eval_legendre(n, cos_gamma)
        # |P_n| <= 1 bounds the term by its radial factor
        if n > ka and np.max(np.abs(radial)) < SERIES_TOL:
            return p0 * np.exp(1j * ctx.k * direction @ np.asarray(center, dtype=float)) * total
    raise ConvergenceError(f"Partial-wave series did not converge within {SERIES_MAX_TERMS} terms")


def relative_error(a, b) -> float:
    """||a - b|| / ||b||"""
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.shape != b.shape:
        raise DimensionError("Vectors differ in length")
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise DomainError("Reference vector is zero")
    return float(np.linalg.norm(a - b) / norm)
