"""
Helmholtz kernels, Burton-Miller element influence integrals and incident fields.

Time convention e^{-i omega t}; G(x, y) = e^{ik|x-y|} / (4 pi |x-y|).
Normals point into the fluid. The Burton-Miller row at collocation point x reads

    1/2 (1 - i alpha k beta_x) p(x) - sum_j (h_xj + i k beta_j g_xj) p_j
        = p_inc(x) + alpha dp_inc/dn(x)

with h = int [dG/dn_y + alpha d2G/dn_x dn_y] and g = int [G + alpha dG/dn_x].
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from fmpbem.numerics.errors import DomainError, SingularityError
from fmpbem.numerics.geometry import HalfSpace, SurfaceMesh, bilinear_gauss_rule, subdivide_corners

FOUR_PI = 4.0 * np.pi

# kernel evaluations per chunk of the vectorized quadrature
_CHUNK = 2_000_000

# relative margin on the near-field threshold and subdivision levels; a pair exactly on a
# boundary (e.g. distance == pitch == threshold) must resolve the same way in every frame
_NEAR_SLACK = 1e-9


@dataclass(frozen=True)
class WaveContext:
    """Frequency-dependent scalars of one solve"""
    frequency: float
    c: float = 343.0
    rho: float = 1.21
    alpha: Optional[complex] = None
    omega: float = field(init=False)
    k: float = field(init=False)

    def __post_init__(self):
        if self.frequency <= 0 or self.c <= 0 or self.rho <= 0:
            raise DomainError("Frequency, speed of sound and density must be positive")
        omega = 2.0 * np.pi * self.frequency
        k = omega / self.c
        alpha = -1j / k if self.alpha is None else complex(self.alpha)
        if alpha.imag == 0.0:
            raise DomainError("Burton-Miller coupling must have a nonzero imaginary part")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class QuadratureSettings:
    """Element integration rules"""
    order: int = 4
    self_order: int = 16
    near_threshold: float = 3.0
    max_subdivision: int = 3


@dataclass(frozen=True)
class PlaneWave:
    direction: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    amplitude: complex = 1.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if not np.isclose(np.linalg.norm(d), 1.0, atol=1e-12):
            raise DomainError(f"Plane-wave direction must be a unit vector, got {self.direction}")


@dataclass(frozen=True)
class Monopole:
    """Point source with pressure `strength` (Pa) at 1 m: p = S e^{ikr} / r"""
    position: Tuple[float, float, float]
    strength: complex = 1.0


@dataclass(frozen=True)
class IncidentField:
    """Superposition of sources, with image sources when half_space is set"""
    sources: Tuple[Union[PlaneWave, Monopole], ...]
    half_space: Optional[HalfSpace] = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))


# ----------------------------------------------------------------------
# Point kernels
# ----------------------------------------------------------------------

def _distance(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("Kernel evaluated at coincident points")
    return diff, r


def green_full(ctx: WaveContext, x, y):
    _, r = _distance(x, y)
    return np.exp(1j * ctx.k * r) / (FOUR_PI * r)


def green_half(ctx: WaveContext, x, y, hs: HalfSpace):
    image = hs.mirror(np.asarray(y, dtype=float))
    return green_full(ctx, x, y) + hs.reflection * green_full(ctx, x, image)


def kernel_derivatives(ctx: WaveContext, x, y, n_x, n_y):
    """(G, dG/dn_y, dG/dn_x, d2G/dn_x dn_y) for full space"""
    diff, r = _distance(x, y)
    return _kernel_terms(ctx.k, diff, r, np.asarray(n_x, dtype=float), np.asarray(n_y, dtype=float))


def _kernel_terms(k, diff, r, n_x, n_y):
    g = np.exp(1j * k * r) / (FOUR_PI * r)
    r_nx = np.einsum("...i,...i->...", diff, n_x) / r
    r_ny = np.einsum("...i,...i->...", diff, n_y) / r
    nx_ny = np.einsum("...i,...i->...", n_x, n_y)
    radial = 1j * k - 1.0 / r
    dg_dny = -radial * g * r_ny
    dg_dnx = radial * g * r_nx
    d2g = g * ((k * k + 3j * k / r - 3.0 / r ** 2) * r_nx * r_ny - (1j * k / r - 1.0 / r ** 2) * nx_ny)
    return g, dg_dny, dg_dnx, d2g


def _combined(k, alpha, diff, n_x, n_y):
    """Burton-Miller integrands (dG/dn_y + a d2G, G + a dG/dn_x)"""
    r = np.linalg.norm(diff, axis=-1)
    # self pairs hit r = 0 with odd orders; those entries are overwritten
    with np.errstate(divide="ignore", invalid="ignore"):
        g, dg_dny, dg_dnx, d2g = _kernel_terms(k, diff, r, n_x, n_y)
    if alpha == 0:
        return dg_dny, g
    return dg_dny + alpha * d2g, g + alpha * dg_dnx


# ----------------------------------------------------------------------
# Element integrals
# ----------------------------------------------------------------------

def _regular_block(k, alpha, points, normals, gauss_points, gauss_weights, source_normals):
    n_targets, (n_sources, n_q) = points.shape[0], gauss_weights.shape
    h = np.empty((n_targets, n_sources), dtype=complex)
    g = np.empty((n_targets, n_sources), dtype=complex)
    rows = max(1, _CHUNK // max(1, n_sources * n_q))
    for start in range(0, n_targets, rows):
        stop = min(n_targets, start + rows)
        diff = points[start:stop, None, None, :] - gauss_points[None, :, :, :]
        kh, kg = _combined(k, alpha, diff, normals[start:stop, None, None, :], source_normals[None, :, None, :])
        h[start:stop] = np.einsum("teq,eq->te", kh, gauss_weights)
        g[start:stop] = np.einsum("teq,eq->te", kg, gauss_weights)
    return h, g


def _pairwise(k, alpha, points, normals, corners, source_normals, order, levels):
    """Subdivided quadrature for explicit (target, element) pairs sharing one level"""
    n_pairs = points.shape[0]
    h = np.empty(n_pairs, dtype=complex)
    g = np.empty(n_pairs, dtype=complex)
    n_sub = 4 ** levels
    per_pair = n_sub * order * order
    batch = max(1, _CHUNK // per_pair)
    for start in range(0, n_pairs, batch):
        stop = min(n_pairs, start + batch)
        sub = subdivide_corners(corners[start:stop], levels).reshape(-1, 4, 3)
        gp, gw = bilinear_gauss_rule(sub, order)
        gp = gp.reshape(stop - start, per_pair, 3)
        gw = gw.reshape(stop - start, per_pair)
        diff = points[start:stop, None, :] - gp
        kh, kg = _combined(k, alpha, diff, normals[start:stop, None, :], source_normals[start:stop, None, :])
        h[start:stop] = np.einsum("pq,pq->p", kh, gw)
        g[start:stop] = np.einsum("pq,pq->p", kg, gw)
    return h, g


def _self_terms(k, alpha, points, corners, order):
    """
    Integrals over the element containing the collocation point, in polar
    coordinates over the four triangles (x, X_a, X_a+1).

    On a flat panel dG/dn_y and dG/dn_x vanish; the single layer integrates to
    int (e^{ikR} - 1)/(4 pi i k) dtheta and the hypersingular finite part to
    int (ik - e^{ikR}/R)/(4 pi) dtheta.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    start = corners
    end = np.roll(corners, -1, axis=1)
    edge = end - start
    length = np.linalg.norm(edge, axis=2, keepdims=True)
    tangent = edge / length
    rel = start - points[:, None, :]
    along = np.einsum("pai,pai->pa", rel, tangent)
    foot = rel - along[..., None] * tangent
    height = np.linalg.norm(foot, axis=2)
    t1 = along
    t2 = along + length[..., 0]
    theta1 = np.arctan2(t1, height)
    theta2 = np.arctan2(t2, height)
    half = 0.5 * (theta2 - theta1)
    theta = 0.5 * (theta2 + theta1)[..., None] + half[..., None] * nodes
    radius = height[..., None] / np.cos(theta)
    w = half[..., None] * weights

    # (e^{ikR} - 1)/(ik) = R e^{ikR/2} sinc(kR/2pi)
    single = radius * np.exp(0.5j * k * radius) * np.sinc(k * radius / (2.0 * np.pi))
    g = np.einsum("paq,paq->p", single, w) / FOUR_PI
    hyper = 1j * k - np.exp(1j * k * radius) / radius
    h = alpha * np.einsum("paq,paq->p", hyper, w) / FOUR_PI
    return h, g


def influence_matrices(ctx: WaveContext, points: np.ndarray, normals: np.ndarray, sources: SurfaceMesh,
                       self_pairs: Optional[np.ndarray] = None,
                       settings: QuadratureSettings = QuadratureSettings(),
                       alpha: Optional[complex] = None,
                       half_space: Optional[HalfSpace] = None,
                       image_only: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Influence coefficients of constant elements at target points.

    Returns (H, G) of shape (targets, elements) with
    H[t, e] = int_e [dG/dn_y + alpha d2G/dn_x dn_y] and G[t, e] = int_e [G + alpha dG/dn_x].
    self_pairs[t] names the element containing target t (or -1).
    Targets closer than near_threshold element diameters to an element
    are integrated on subdivided elements.

    With a half_space the image elements are added with weight R_p;
    image_only keeps the image term alone.
    """
    alpha = ctx.alpha if alpha is None else alpha
    points = np.atleast_2d(np.asarray(points, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    if image_only and half_space is None:
        raise DomainError("image_only requires a half-space")

    h = np.zeros((points.shape[0], sources.n_elements), dtype=complex)
    g = np.zeros_like(h)
    if not image_only:
        h, g = _matrices(ctx.k, alpha, points, normals, sources, self_pairs, settings)
    if half_space is not None and half_space.reflection != 0:
        ih, ig = _matrices(ctx.k, alpha, points, normals, sources.mirrored(half_space), None, settings)
        h = h + half_space.reflection * ih
        g = g + half_space.reflection * ig
    return h, g


def _matrices(k, alpha, points, normals, sources, self_pairs, settings):
    gp, gw = sources.gauss_rule(settings.order)
    h, g = _regular_block(k, alpha, points, normals, gp, gw, sources.normals)

    is_self = np.zeros(h.shape, dtype=bool)
    if self_pairs is not None:
        self_pairs = np.asarray(self_pairs)
        rows = np.nonzero(self_pairs >= 0)[0]
        is_self[rows, self_pairs[rows]] = True

    distance = cdist(points, sources.centers)
    diameter = sources.diameters[None, :]
    near = (distance < settings.near_threshold * diameter * (1.0 - _NEAR_SLACK)) & ~is_self
    if np.any(near):
        t_idx, e_idx = np.nonzero(near)
        ratio = settings.near_threshold * diameter[0, e_idx] / np.maximum(distance[t_idx, e_idx], 1e-300)
        levels = np.clip(np.ceil(np.log2(ratio) - _NEAR_SLACK).astype(int), 1, settings.max_subdivision)
        for level in np.unique(levels):
            sel = levels == level
            ph, pg = _pairwise(k, alpha, points[t_idx[sel]], normals[t_idx[sel]],
                               sources.corners[e_idx[sel]], sources.normals[e_idx[sel]],
                               settings.order, int(level))
            h[t_idx[sel], e_idx[sel]] = ph
            g[t_idx[sel], e_idx[sel]] = pg

    if np.any(is_self):
        t_idx, e_idx = np.nonzero(is_self)
        sh, sg = _self_terms(k, alpha, points[t_idx], sources.corners[e_idx], settings.self_order)
        h[t_idx, e_idx] = sh
        g[t_idx, e_idx] = sg
    return h, g


def element_influence(ctx: WaveContext, element: SurfaceMesh, collocation_x, n_x,
                      settings: QuadratureSettings = QuadratureSettings(),
                      self_term: bool = False) -> Tuple[complex, complex]:
    """(h_coef, g_coef) of a single element at one collocation point"""
    if element.n_elements != 1:
        raise DomainError("element_influence expects a single-element mesh")
    h, g = influence_matrices(ctx, np.asarray(collocation_x, dtype=float)[None, :],
                              np.asarray(n_x, dtype=float)[None, :], element,
                              self_pairs=np.array([0 if self_term else -1]), settings=settings)
    return complex(h[0, 0]), complex(g[0, 0])


# ----------------------------------------------------------------------
# Incident fields
# ----------------------------------------------------------------------

def _source_values(source, k, x, n_x):
    if isinstance(source, PlaneWave):
        d = np.asarray(source.direction, dtype=float)
        p = source.amplitude * np.exp(1j * k * (x @ d))
        return p, 1j * k * (n_x @ d) * p
    if isinstance(source, Monopole):
        diff, r = _distance(x, np.asarray(source.position, dtype=float))
        p = source.strength * np.exp(1j * k * r) / r
        dp = (1j * k - 1.0 / r) * p * np.einsum("...i,...i->...", diff, n_x) / r
        return p, dp
    raise DomainError(f"Unknown incident source {type(source).__name__}")


def incident_values(field: IncidentField, ctx: WaveContext, x, n_x) -> Tuple[np.ndarray, np.ndarray]:
    """(p_inc, dp_inc/dn) at points x with normals n_x; image sources added for half-space fields"""
    x = np.asarray(x, dtype=float)
    n_x = np.broadcast_to(np.asarray(n_x, dtype=float), x.shape)
    p = np.zeros(x.shape[:-1], dtype=complex)
    dp = np.zeros(x.shape[:-1], dtype=complex)
    hs = field.half_space
    for source in field.sources:
        sp, sdp = _source_values(source, ctx.k, x, n_x)
        p += sp
        dp += sdp
        if hs is not None and hs.reflection != 0:
            # the image field at x equals the direct field at the mirrored point
            ip, idp = _source_values(source, ctx.k, hs.mirror(x), hs.mirror_direction(n_x))
            p += hs.reflection * ip
            dp += hs.reflection * idp
    return p, dp
