"""
Surface meshes of flat quadrilaterals, lattice replication, FMM boxes and
half-space mirroring.

Element ordering of replicated meshes is cell-major with the cell index
running x-fastest, then y, then z. Every structured matrix in the package
relies on that ordering.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from fmpbem.numerics.errors import ConfigurationError, DomainError

# relative slack of the admissibility test, so that neighbours lying exactly
# at distance 2r are classified the same way on every platform
ADMISSIBILITY_RTOL = 1e-12


def _as_vector(p) -> np.ndarray:
    v = np.asarray(p, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise DomainError(f"Expected a 3-vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class HalfSpace:
    """Axis-aligned mirror plane x[axis] = offset with reflection coefficient R_p"""
    axis: int = 2
    offset: float = 0.0
    reflection: complex = 1.0

    def __post_init__(self):
        if self.axis not in (0, 1, 2):
            raise DomainError(f"Mirror axis must be 0, 1 or 2, got {self.axis}")

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[self.axis, self.axis] = -1.0
        return m

    def mirror(self, points: np.ndarray) -> np.ndarray:
        """Reflect an array of points (..., 3) across the plane"""
        mirrored = np.array(points, dtype=float, copy=True)
        mirrored[..., self.axis] = 2.0 * self.offset - mirrored[..., self.axis]
        return mirrored

    def mirror_direction(self, vectors: np.ndarray) -> np.ndarray:
        mirrored = np.array(vectors, copy=True)
        mirrored[..., self.axis] = -mirrored[..., self.axis]
        return mirrored


def mirror_point(p, plane: HalfSpace) -> np.ndarray:
    return plane.mirror(_as_vector(p))


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """
    Flat quadrilateral boundary elements.

    corners: (N, 4, 3) counter-clockwise seen from the fluid side
    normals: (N, 3) unit normals pointing into the fluid
    beta:    (N,) normalized surface admittance, 0 for rigid surfaces
    """
    corners: np.ndarray
    normals: np.ndarray
    beta: np.ndarray
    areas: np.ndarray = field(init=False)
    centers: np.ndarray = field(init=False)

    def __post_init__(self):
        corners = np.asarray(self.corners, dtype=float).reshape(-1, 4, 3)
        normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        beta = np.broadcast_to(np.asarray(self.beta, dtype=complex), (corners.shape[0],)).copy()
        if normals.shape[0] != corners.shape[0]:
            raise DomainError("Normals and corners disagree on the element count")
        cross = np.cross(corners[:, 2] - corners[:, 0], corners[:, 3] - corners[:, 1])
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        if np.any(areas <= 0.0):
            raise DomainError("Mesh contains degenerate elements")
        for name, value in (("corners", corners), ("normals", normals), ("beta", beta),
                            ("areas", areas), ("centers", corners.mean(axis=1))):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_corners(cls, corners, beta=0.0) -> "SurfaceMesh":
        """Build a mesh whose normals follow the corner ordering"""
        corners = np.asarray(corners, dtype=float).reshape(-1, 4, 3)
        cross = np.cross(corners[:, 2] - corners[:, 0], corners[:, 3] - corners[:, 1])
        normals = cross / np.linalg.norm(cross, axis=1, keepdims=True)
        return cls(corners=corners, normals=normals, beta=beta)

    @property
    def n_elements(self) -> int:
        return self.corners.shape[0]

    @property
    def diameters(self) -> np.ndarray:
        d1 = np.linalg.norm(self.corners[:, 2] - self.corners[:, 0], axis=1)
        d2 = np.linalg.norm(self.corners[:, 3] - self.corners[:, 1], axis=1)
        return np.maximum(d1, d2)

    @property
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        flat = self.corners.reshape(-1, 3)
        return flat.min(axis=0), flat.max(axis=0)

    @property
    def extent(self) -> np.ndarray:
        low, high = self.bounding_box
        return high - low

    def translated(self, offset) -> "SurfaceMesh":
        return SurfaceMesh(corners=self.corners + _as_vector(offset), normals=self.normals, beta=self.beta)

    def mirrored(self, plane: HalfSpace) -> "SurfaceMesh":
        """Image mesh; normals are mirrored explicitly since the corner order flips orientation"""
        return SurfaceMesh(corners=plane.mirror(self.corners),
                           normals=plane.mirror_direction(self.normals), beta=self.beta)

    def with_beta(self, beta) -> "SurfaceMesh":
        return SurfaceMesh(corners=self.corners, normals=self.normals, beta=beta)

    def gauss_rule(self, order: int) -> Tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss-Legendre points (N, q*q, 3) and weights (N, q*q) on the bilinear map"""
        return bilinear_gauss_rule(self.corners, order)

    @staticmethod
    def concatenate(meshes: Sequence["SurfaceMesh"]) -> "SurfaceMesh":
        return SurfaceMesh(corners=np.concatenate([m.corners for m in meshes]),
                           normals=np.concatenate([m.normals for m in meshes]),
                           beta=np.concatenate([m.beta for m in meshes]))

    def check(self, tol: float = 1e-12) -> List[str]:
        """Return a list of validity problems (empty when the mesh is valid)"""
        problems = []
        if not np.allclose(np.linalg.norm(self.normals, axis=1), 1.0, atol=tol):
            problems.append("normals are not unit length")
        scale = np.maximum(self.diameters, 1.0)
        offplane = np.abs(np.einsum("eij,ej->ei", self.corners - self.centers[:, None, :], self.normals))
        if np.any(offplane.max(axis=1) > tol * scale):
            problems.append("elements are not flat")
        return problems


def bilinear_gauss_rule(corners: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xi, eta = np.meshgrid(nodes, nodes, indexing="ij")
    xi, eta = xi.ravel(), eta.ravel()
    w = np.outer(weights, weights).ravel()
    shape = 0.25 * np.stack([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                             (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)], axis=1)
    d_xi = 0.25 * np.stack([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)], axis=1)
    d_eta = 0.25 * np.stack([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)], axis=1)
    points = np.einsum("qa,eai->eqi", shape, corners)
    t_xi = np.einsum("qa,eai->eqi", d_xi, corners)
    t_eta = np.einsum("qa,eai->eqi", d_eta, corners)
    jacobian = np.linalg.norm(np.cross(t_xi, t_eta), axis=2)
    return points, jacobian * w[None, :]


def subdivide_corners(corners: np.ndarray, levels: int) -> np.ndarray:
    """Split every quad into 4**levels bilinear sub-quads, shape (N, 4**levels, 4, 3)"""
    n = 2 ** levels
    s = np.linspace(-1.0, 1.0, n + 1)
    u0, v0 = np.meshgrid(s[:-1], s[:-1], indexing="ij")
    u0, v0 = u0.ravel(), v0.ravel()
    h = 2.0 / n
    local = np.stack([np.stack([u0, v0], 1), np.stack([u0 + h, v0], 1),
                      np.stack([u0 + h, v0 + h], 1), np.stack([u0, v0 + h], 1)], axis=1)
    xi, eta = local[..., 0], local[..., 1]
    shape = 0.25 * np.stack([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                             (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)], axis=-1)
    return np.einsum("sca,eai->esci", shape, corners)


# ----------------------------------------------------------------------
# Mesh generators
# ----------------------------------------------------------------------

def _flatten_quads(corners: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Project the corners of each quad onto its mean plane; returns (corners, normals)"""
    center = corners.mean(axis=1, keepdims=True)
    cross = np.cross(corners[:, 2] - corners[:, 0], corners[:, 3] - corners[:, 1])
    normals = cross / np.linalg.norm(cross, axis=1, keepdims=True)
    height = np.einsum("eci,ei->ec", corners - center, normals)
    return corners - height[..., None] * normals[:, None, :], normals


def _orient(corners: np.ndarray, normals: np.ndarray, desired: np.ndarray):
    flip = np.einsum("ei,ei->e", normals, desired) < 0.0
    corners = corners.copy()
    corners[flip] = corners[flip][:, ::-1]
    normals = np.where(flip[:, None], -normals, normals)
    return corners, normals


_CUBE_FACES = (
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
)


def generate_sphere_mesh(radius: float, refinement: int, center=(0.0, 0.0, 0.0), beta=0.0) -> SurfaceMesh:
    """Cube-sphere of 6*refinement**2 flat quadrilaterals with outward normals"""
    if radius <= 0:
        raise DomainError(f"Sphere radius must be positive, got {radius}")
    if refinement < 1:
        raise DomainError(f"Refinement must be >= 1, got {refinement}")
    # equiangular parametrisation of the cube faces
    s = np.tan(np.linspace(-np.pi / 4, np.pi / 4, refinement + 1))
    quads = []
    for normal, u_axis, v_axis in _CUBE_FACES:
        e, u, v = (np.asarray(a, dtype=float) for a in (normal, u_axis, v_axis))
        grid = e[None, None, :] + s[:, None, None] * u + s[None, :, None] * v
        grid = radius * grid / np.linalg.norm(grid, axis=2, keepdims=True)
        quads.append(np.stack([grid[:-1, :-1], grid[1:, :-1], grid[1:, 1:], grid[:-1, 1:]],
                              axis=2).reshape(-1, 4, 3))
    corners, normals = _flatten_quads(np.concatenate(quads))
    corners, normals = _orient(corners, normals, corners.mean(axis=1))
    return SurfaceMesh(corners=corners + _as_vector(center), normals=normals, beta=beta)


def generate_plate_mesh(origin, edge_u, edge_v, divisions_u: int, divisions_v: int,
                        normal_sign: int = 1, beta=0.0) -> SurfaceMesh:
    """Rectangular plate spanned by edge_u and edge_v; normal along +/-(u x v)"""
    origin, edge_u, edge_v = _as_vector(origin), _as_vector(edge_u), _as_vector(edge_v)
    a = np.linspace(0.0, 1.0, divisions_u + 1)
    b = np.linspace(0.0, 1.0, divisions_v + 1)
    grid = origin + a[:, None, None] * edge_u + b[None, :, None] * edge_v
    corners = np.stack([grid[:-1, :-1], grid[1:, :-1], grid[1:, 1:], grid[:-1, 1:]], axis=2).reshape(-1, 4, 3)
    desired = np.sign(normal_sign) * np.cross(edge_u, edge_v)
    corners, normals = _flatten_quads(corners)
    corners, normals = _orient(corners, normals, np.broadcast_to(desired, normals.shape))
    return SurfaceMesh(corners=corners, normals=normals, beta=beta)


def _ring_quads(radius: float, angles: np.ndarray, heights: np.ndarray) -> np.ndarray:
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    grid = np.concatenate([np.broadcast_to(ring[:, None, :], (len(angles), len(heights), 2)),
                           np.broadcast_to(heights[None, :, None], (len(angles), len(heights), 1))], axis=2)
    return np.stack([grid[:-1, :-1], grid[1:, :-1], grid[1:, 1:], grid[:-1, 1:]], axis=2).reshape(-1, 4, 3)


def generate_cylinder_mesh(radius: float, height: float, n_circ: int, n_height: int,
                           beta=0.0) -> SurfaceMesh:
    """Open cylindrical segment about the z axis, z in [0, height], no caps"""
    if radius <= 0 or height <= 0:
        raise DomainError("Cylinder radius and height must be positive")
    angles = np.linspace(0.0, 2.0 * np.pi, n_circ + 1)
    quads = _ring_quads(radius, angles, np.linspace(0.0, height, n_height + 1))
    corners, normals = _flatten_quads(quads)
    outward = corners.mean(axis=1) * np.array([1.0, 1.0, 0.0])
    corners, normals = _orient(corners, normals, outward)
    return SurfaceMesh(corners=corners, normals=normals, beta=beta)


def generate_cshape_mesh(outer_radius: float, inner_radius: float, slit_width: float, height: float,
                         n_circ: int, n_height: int, slit_angle: float = np.pi, beta=0.0) -> SurfaceMesh:
    """Open c-shaped shell segment (outer wall, inner wall, two slit faces), normals into the fluid"""
    if not 0 < inner_radius < outer_radius:
        raise DomainError("C-shape requires 0 < inner_radius < outer_radius")
    if not 0 < slit_width < 2 * inner_radius:
        raise DomainError("Slit width must be positive and smaller than the inner diameter")
    heights = np.linspace(0.0, height, n_height + 1)
    half_outer = np.arcsin(0.5 * slit_width / outer_radius)
    half_inner = np.arcsin(0.5 * slit_width / inner_radius)

    outer_angles = np.linspace(slit_angle + half_outer, slit_angle + 2 * np.pi - half_outer, n_circ + 1)
    inner_angles = np.linspace(slit_angle + half_inner, slit_angle + 2 * np.pi - half_inner, n_circ + 1)
    outer = _ring_quads(outer_radius, outer_angles, heights)
    inner = _ring_quads(inner_radius, inner_angles, heights)

    def slit_face(inner_angle, outer_angle):
        p_in = np.array([inner_radius * np.cos(inner_angle), inner_radius * np.sin(inner_angle)])
        p_out = np.array([outer_radius * np.cos(outer_angle), outer_radius * np.sin(outer_angle)])
        rows = []
        for z0, z1 in zip(heights[:-1], heights[1:]):
            rows.append([[*p_in, z0], [*p_out, z0], [*p_out, z1], [*p_in, z1]])
        return np.asarray(rows, dtype=float)

    first = slit_face(inner_angles[0], outer_angles[0])
    last = slit_face(inner_angles[-1], outer_angles[-1])

    axis_xy = np.array([1.0, 1.0, 0.0])
    into_slit_first = np.array([np.sin(slit_angle + half_outer), -np.cos(slit_angle + half_outer), 0.0])
    into_slit_last = np.array([-np.sin(slit_angle - half_outer), np.cos(slit_angle - half_outer), 0.0])

    parts = []
    for quads, desired in ((outer, lambda c: c.mean(axis=1) * axis_xy),
                           (inner, lambda c: -c.mean(axis=1) * axis_xy),
                           (first, lambda c: np.broadcast_to(into_slit_first, (c.shape[0], 3))),
                           (last, lambda c: np.broadcast_to(into_slit_last, (c.shape[0], 3)))):
        corners, normals = _flatten_quads(quads)
        parts.append(_orient(corners, normals, desired(corners)))
    return SurfaceMesh(corners=np.concatenate([p[0] for p in parts]),
                       normals=np.concatenate([p[1] for p in parts]), beta=beta)


# ----------------------------------------------------------------------
# Mesh files
# ----------------------------------------------------------------------

def write_mesh(mesh: SurfaceMesh, path: Union[str, Path]) -> None:
    rows = np.concatenate([mesh.corners.reshape(-1, 12), mesh.beta.real[:, None], mesh.beta.imag[:, None]], axis=1)
    np.savetxt(path, rows, fmt="%.17g", header=str(mesh.n_elements), comments="")


def read_mesh(path: Union[str, Path]) -> SurfaceMesh:
    with open(path, "r") as handle:
        header = handle.readline().split()
        if len(header) != 1:
            raise DomainError(f"Mesh file {path}: first line must hold the element count")
        count = int(header[0])
        rows = np.loadtxt(handle, ndmin=2)
    if rows.shape != (count, 14):
        raise DomainError(f"Mesh file {path}: expected {count} rows of 14 numbers, got {rows.shape}")
    return SurfaceMesh.from_corners(rows[:, :12].reshape(-1, 4, 3), beta=rows[:, 12] + 1j * rows[:, 13])


# ----------------------------------------------------------------------
# Lattices and boxes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """Axis-aligned finite lattice; counts and pitches are given as (x, y, z)"""
    counts: Tuple[int, int, int] = (1, 1, 1)
    pitches: Tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        pitches = tuple(float(p) for p in self.pitches)
        if len(counts) != 3 or len(pitches) != 3:
            raise ConfigurationError("Lattice counts and pitches need three entries (x, y, z)")
        if min(counts) < 1:
            raise ConfigurationError(f"Lattice counts must be >= 1, got {counts}")
        for c, p in zip(counts, pitches):
            if c > 1 and p <= 0:
                raise ConfigurationError(f"Periodic directions need a positive pitch, got {pitches}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "pitches", pitches)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    @property
    def periodic_axes(self) -> Tuple[int, ...]:
        return tuple(a for a in range(3) if self.counts[a] > 1)

    def cell_index(self, i: int, j: int, l: int) -> int:
        mx, my, _ = self.counts
        return i + mx * (j + my * l)

    def cell_multi_indices(self) -> np.ndarray:
        """(n_cells, 3) integer (i, j, l) in cell-major order"""
        mx, my, mz = self.counts
        l, j, i = np.meshgrid(np.arange(mz), np.arange(my), np.arange(mx), indexing="ij")
        return np.stack([i.ravel(), j.ravel(), l.ravel()], axis=1)

    def offset_vector(self, offset) -> np.ndarray:
        return np.asarray(offset, dtype=float) * np.asarray(self.pitches)

    def cell_offsets(self) -> np.ndarray:
        return self.cell_multi_indices() * np.asarray(self.pitches)[None, :]

    def offsets(self) -> np.ndarray:
        """All lattice offset tuples in [1-M, M-1] per axis, shape (prod(2M-1), 3)"""
        ranges = [np.arange(1 - m, m) for m in self.counts]
        oz, oy, ox = np.meshgrid(ranges[2], ranges[1], ranges[0], indexing="ij")
        return np.stack([ox.ravel(), oy.ravel(), oz.ravel()], axis=1)

    def check_cell(self, cell: SurfaceMesh, tol: float = 1e-9) -> None:
        extent = cell.extent
        for axis in self.periodic_axes:
            if self.pitches[axis] < extent[axis] - tol:
                raise ConfigurationError(
                    f"Pitch {self.pitches[axis]} along axis {axis} is smaller than the cell extent {extent[axis]}")


def replicate_lattice(cell: SurfaceMesh, lattice: Lattice) -> SurfaceMesh:
    lattice.check_cell(cell)
    shifts = lattice.cell_offsets()
    corners = cell.corners[None, :, :, :] + shifts[:, None, None, :]
    return SurfaceMesh(corners=corners.reshape(-1, 4, 3),
                       normals=np.tile(cell.normals, (lattice.n_cells, 1)),
                       beta=np.tile(cell.beta, lattice.n_cells))


@dataclass(frozen=True, eq=False)
class BoxGrid:
    """One FMM box per lattice cell, all of characteristic size r"""
    centers: np.ndarray
    radius: float
    base_center: np.ndarray


def box_radius(cell: SurfaceMesh, lattice: Lattice) -> float:
    """Half the diagonal of the cell box (pitch along periodic axes, cell extent otherwise)"""
    extent = np.array(cell.extent, dtype=float)
    for axis in lattice.periodic_axes:
        extent[axis] = max(extent[axis], lattice.pitches[axis])
    return 0.5 * float(np.linalg.norm(extent))


def box_grid(cell: SurfaceMesh, lattice: Lattice) -> BoxGrid:
    low, high = cell.bounding_box
    base = 0.5 * (low + high)
    return BoxGrid(centers=base[None, :] + lattice.cell_offsets(), radius=box_radius(cell, lattice),
                   base_center=base)


def admissible(center_a, center_b, r: float) -> bool:
    """True iff |center_a - center_b| >= 2r"""
    if r <= 0:
        raise DomainError(f"Box size must be positive, got {r}")
    distance = np.linalg.norm(_as_vector(center_a) - _as_vector(center_b))
    return bool(distance >= 2.0 * r * (1.0 - ADMISSIBILITY_RTOL))


def near_offsets(cell: SurfaceMesh, lattice: Lattice) -> List[Tuple[int, int, int]]:
    """Lattice offsets (target - source) whose boxes are inadmissible"""
    r = box_radius(cell, lattice)
    result = []
    for offset in lattice.offsets():
        delta = lattice.offset_vector(offset)
        if not admissible(delta, np.zeros(3), r):
            result.append(tuple(int(o) for o in offset))
    return result
