"""
Special functions for the multipole expansions of the Helmholtz kernel.

Spherical harmonics use the associated Legendre functions WITHOUT the
Condon-Shortley phase and the normalization sqrt((n-|m|)!/(n+|m|)!), so
that Y_n^{-m} = conj(Y_n^m) and sum_m Y_n^m(u) conj(Y_n^m(v)) = P_n(u.v).
Radial arguments are k-scaled: I_n^m(v) = j_n(k|v|) Y_n^m(v/|v|) and
O_n^m(v) = h_n(k|v|) Y_n^m(v/|v|).

Coefficient arrays are flattened with index n*n + n + m.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt
from typing import Tuple

import numpy as np
from scipy import special

from fmpbem.numerics.errors import DomainError, SingularityError

# radius below which a point is treated as the expansion center
_ORIGIN_TOL = 1e-14


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (n, m) of a spherical harmonic"""
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or abs(self.m) > self.n:
            raise DomainError(f"Invalid harmonic index (n={self.n}, m={self.m})")

    @property
    def flat(self) -> int:
        return flatten_index(self.n, self.m)

    @classmethod
    def from_flat(cls, index: int) -> "HarmonicIndex":
        return cls(*unflatten_index(index))


def flatten_index(n: int, m: int) -> int:
    return n * n + n + m


def unflatten_index(index: int) -> Tuple[int, int]:
    if index < 0:
        raise DomainError(f"Negative harmonic index {index}")
    n = int(sqrt(index))
    # guard against sqrt rounding for large perfect squares
    while n * n > index:
        n -= 1
    while (n + 1) * (n + 1) <= index:
        n += 1
    return n, index - n * n - n


def harmonic_count(n_t: int) -> int:
    """Number of (n, m) pairs with n <= n_t"""
    return (n_t + 1) ** 2


@lru_cache(maxsize=None)
def harmonic_table(n_t: int) -> Tuple[np.ndarray, np.ndarray]:
    """Degree and order arrays in flattened order, for n <= n_t"""
    degrees = np.concatenate([np.full(2 * n + 1, n) for n in range(n_t + 1)])
    orders = np.concatenate([np.arange(-n, n + 1) for n in range(n_t + 1)])
    degrees.setflags(write=False)
    orders.setflags(write=False)
    return degrees, orders


# ----------------------------------------------------------------------
# Radial functions
# ----------------------------------------------------------------------

def sph_bessel_j(n, x):
    """Spherical Bessel function of the first kind j_n(x), x >= 0"""
    x = np.asarray(x, dtype=float)
    if np.any(np.asarray(n) < 0) or np.any(x < 0):
        raise DomainError("sph_bessel_j requires n >= 0 and x >= 0")
    result = special.spherical_jn(n, x)
    return result[()] if np.ndim(result) == 0 else result


def sph_hankel1(n, x):
    """Spherical Hankel function of the first kind h_n(x) = j_n(x) + i y_n(x)"""
    x = np.asarray(x, dtype=float)
    if np.any(np.asarray(n) < 0):
        raise DomainError("sph_hankel1 requires n >= 0")
    if np.any(x <= 0):
        raise SingularityError("sph_hankel1 is singular at x = 0")
    result = special.spherical_jn(n, x) + 1j * special.spherical_yn(n, x)
    return result[()] if np.ndim(result) == 0 else result


# ----------------------------------------------------------------------
# Angular functions
# ----------------------------------------------------------------------

def _normalization(n, m):
    n = np.asarray(n)
    am = np.abs(np.asarray(m))
    return np.exp(0.5 * (special.gammaln(n - am + 1) - special.gammaln(n + am + 1)))


def legendre_table(n_max: int, m_max: int, x: np.ndarray) -> np.ndarray:
    """
    Associated Legendre functions without the Condon-Shortley phase.

    Returns an array P[n, m, i] for 0 <= n <= n_max, 0 <= m <= m_max
    evaluated at x[i]; entries with m > n are zero.
    """
    x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), -1.0, 1.0)
    n = np.arange(n_max + 1)[:, None, None]
    m = np.arange(m_max + 1)[None, :, None]
    valid = m <= n
    with np.errstate(invalid="ignore"):
        table = special.lpmv(m, n, x[None, None, :])
    # scipy includes the (-1)^m phase
    table = np.where(valid, table * (-1.0) ** m, 0.0)
    return table


def _spherical_angles(v: np.ndarray):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    r = np.linalg.norm(v, axis=1)
    safe = np.where(r > _ORIGIN_TOL, r, 1.0)
    cos_theta = np.where(r > _ORIGIN_TOL, v[:, 2] / safe, 1.0)
    cos_theta = np.clip(cos_theta, -1.0, 1.0)
    phi = np.where(r > _ORIGIN_TOL, np.arctan2(v[:, 1], v[:, 0]), 0.0)
    return r, cos_theta, phi


def spherical_harmonics(n_max: int, cos_theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Y_n^m for all n <= n_max, shape (points, (n_max+1)**2)"""
    cos_theta = np.atleast_1d(cos_theta)
    phi = np.atleast_1d(phi)
    degrees, orders = harmonic_table(n_max)
    legendre = legendre_table(n_max, n_max, cos_theta)
    values = legendre[degrees, np.abs(orders), :].T
    values = values * _normalization(degrees, orders)[None, :]
    return values * np.exp(1j * orders[None, :] * phi[:, None])


def sph_harmonic(n: int, m: int, theta: float, phi: float) -> complex:
    """Y_n^m(theta, phi) under the convention of this module"""
    if n < 0 or abs(m) > n:
        raise DomainError(f"sph_harmonic requires |m| <= n, got n={n}, m={m}")
    if not 0.0 <= theta <= np.pi:
        raise DomainError(f"Polar angle {theta} outside [0, pi]")
    values = spherical_harmonics(n, np.array([np.cos(theta)]), np.array([phi]))
    return complex(values[0, flatten_index(n, m)])


# ----------------------------------------------------------------------
# Solid harmonics
# ----------------------------------------------------------------------

def regular_solid_harmonics(n_max: int, v: np.ndarray, k: float) -> np.ndarray:
    """I_n^m(v) = j_n(k|v|) Y_n^m for all n <= n_max, shape (points, (n_max+1)**2)"""
    r, cos_theta, phi = _spherical_angles(v)
    degrees, _ = harmonic_table(n_max)
    radial = special.spherical_jn(degrees[None, :], k * r[:, None])
    return radial * spherical_harmonics(n_max, cos_theta, phi)


def singular_solid_harmonics(n_max: int, v: np.ndarray, k: float) -> np.ndarray:
    """O_n^m(v) = h_n(k|v|) Y_n^m for all n <= n_max, shape (points, (n_max+1)**2)"""
    r, cos_theta, phi = _spherical_angles(v)
    if np.any(r <= _ORIGIN_TOL):
        raise SingularityError("Singular solid harmonics are undefined at the origin")
    degrees, _ = harmonic_table(n_max)
    kr = k * r[:, None]
    radial = special.spherical_jn(degrees[None, :], kr) + 1j * special.spherical_yn(degrees[None, :], kr)
    return radial * spherical_harmonics(n_max, cos_theta, phi)


def regular_solid_harmonics_gradient(n_max: int, v: np.ndarray, k: float):
    """
    Regular solid harmonics and their Cartesian gradients.

    Returns (values, gradients) with shapes (points, B) and (points, B, 3),
    B = (n_max+1)**2. The angular derivatives are assembled from Legendre
    values only, so the poles and the origin need no special casing.
    """
    r, cos_theta, phi = _spherical_angles(v)
    sin_theta = np.sqrt(np.clip(1.0 - cos_theta ** 2, 0.0, None))
    degrees, orders = harmonic_table(n_max)
    abs_orders = np.abs(orders)
    legendre = legendre_table(n_max + 1, n_max + 2, cos_theta)

    n = degrees
    am = abs_orders
    p_nm = legendre[n, am, :].T
    # dP/dtheta
    upper = legendre[n, am + 1, :].T
    lower = legendre[n, np.maximum(am - 1, 0), :].T
    dp_dtheta = np.where(am == 0, -upper,
                         0.5 * ((n + am) * (n - am + 1) * lower - upper))
    # |m| P / sin(theta)
    next_upper = legendre[n + 1, am + 1, :].T
    next_lower = legendre[n + 1, np.maximum(am - 1, 0), :].T
    m_p_over_sin = np.where(am == 0, 0.0,
                            0.5 * (next_upper + (n - am + 1) * (n - am + 2) * next_lower))

    norm = _normalization(degrees, orders)[None, :]
    azimuth = np.exp(1j * orders[None, :] * phi[:, None])
    harmonics = norm * p_nm * azimuth

    x = k * r[:, None]
    j_n = special.spherical_jn(n[None, :], x)
    dj_n = special.spherical_jn(n[None, :], x, derivative=True)
    tiny = x < 1e-12
    j_over_x = np.where(tiny, np.where(n[None, :] == 1, 1.0 / 3.0, 0.0),
                        j_n / np.where(tiny, 1.0, x))

    values = j_n * harmonics
    radial_part = k * dj_n * harmonics
    theta_part = k * j_over_x * norm * dp_dtheta * azimuth
    phi_part = k * j_over_x * norm * 1j * np.sign(orders)[None, :] * m_p_over_sin * azimuth

    cos_phi, sin_phi = np.cos(phi)[:, None], np.sin(phi)[:, None]
    st, ct = sin_theta[:, None], cos_theta[:, None]
    r_hat = np.stack([st * cos_phi, st * sin_phi, ct], axis=-1)
    theta_hat = np.stack([ct * cos_phi, ct * sin_phi, -st], axis=-1)
    phi_hat = np.stack([-sin_phi, cos_phi, np.zeros_like(st)], axis=-1)

    gradients = (radial_part[..., None] * r_hat
                 + theta_part[..., None] * theta_hat
                 + phi_part[..., None] * phi_hat)
    return values, gradients


def solid_regular_I(n: int, m: int, v, k: float) -> complex:
    if n < 0 or abs(m) > n:
        raise DomainError(f"solid_regular_I requires |m| <= n, got n={n}, m={m}")
    return complex(regular_solid_harmonics(n, np.asarray(v, dtype=float), k)[0, flatten_index(n, m)])


def solid_singular_O(n: int, m: int, v, k: float) -> complex:
    if n < 0 or abs(m) > n:
        raise DomainError(f"solid_singular_O requires |m| <= n, got n={n}, m={m}")
    return complex(singular_solid_harmonics(n, np.asarray(v, dtype=float), k)[0, flatten_index(n, m)])


# ----------------------------------------------------------------------
# Angular momentum coupling
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def wigner3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol from the Racah sum, evaluated in exact rational arithmetic"""
    if min(j1, j2, j3) < 0:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if m1 + m2 + m3 != 0:
        return 0.0
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0

    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denominator = (factorial(k) * factorial(j3 - j2 + k + m1) * factorial(j3 - j1 + k - m2)
                       * factorial(j1 + j2 - j3 - k) * factorial(j1 - k - m1) * factorial(j2 - k + m2))
        total += Fraction((-1) ** k, denominator)

    triangle = Fraction(factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3),
                        factorial(j1 + j2 + j3 + 1))
    weights = (factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) * factorial(j2 - m2)
               * factorial(j3 + m3) * factorial(j3 - m3))
    squared = triangle * weights * total * total
    sign = (-1) ** (j1 - j2 - m3) * (1 if total >= 0 else -1)
    return sign * sqrt(float(squared))


def _i_power(exponent: int) -> complex:
    return (1, 1j, -1, -1j)[exponent % 4]


def coupling_W(np_: int, n: int, mp: int, m: int, l: int) -> complex:
    """W_{n',n,m',m,l} = (2l+1) i^{n'-n+l} (n n' l; 0 0 0)(n n' l; m m' -m-m')"""
    first = wigner3j(n, np_, l, 0, 0, 0)
    if first == 0.0:
        return 0j
    return (2 * l + 1) * _i_power(np_ - n + l) * first * wigner3j(n, np_, l, m, mp, -m - mp)


def coupling_degrees(n: int, np_: int, mu: int) -> range:
    """Degrees l with max(|mu|, |n-n'|) <= l <= n+n' and n+n'+l even"""
    low = max(abs(mu), abs(n - np_))
    if (low + n + np_) % 2:
        low += 1
    return range(low, n + np_ + 1, 2)


@lru_cache(maxsize=None)
def addition_coefficient(np_: int, mp: int, n: int, m: int, l: int) -> float:
    """
    Coefficient C(n',m',n,m,l) of the addition theorem

        F_{n'}^{m'}(a + D) = sum_{n,m} (2n+1) conj(I_n^m(a)) sum_l C F_l^{m+m'}(D)

    valid for F = I everywhere and F = O when |a| < |D|.
    """
    first = wigner3j(np_, n, l, 0, 0, 0)
    if first == 0.0:
        return 0.0
    second = wigner3j(np_, n, l, mp, m, -m - mp)
    if second == 0.0:
        return 0.0
    # n + l - n' is even whenever the first symbol is nonzero
    sign = (-1) ** ((n + l - np_) // 2) * (-1) ** ((abs(m) + abs(mp) + abs(m + mp)) // 2)
    return sign * (2 * l + 1) * first * second
