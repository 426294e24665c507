import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from fmpbem.numerics.errors import DomainError, SingularityError
from fmpbem.numerics.specfun import (HarmonicIndex, addition_coefficient, coupling_degrees, flatten_index,
                                     harmonic_count, harmonic_table, regular_solid_harmonics,
                                     regular_solid_harmonics_gradient, singular_solid_harmonics, solid_regular_I,
                                     solid_singular_O, sph_bessel_j, sph_hankel1, sph_harmonic,
                                     spherical_harmonics, unflatten_index, wigner3j)


class TestIndexing:
    def test_flatten_roundtrip(self):
        for n in range(12):
            for m in range(-n, n + 1):
                assert unflatten_index(flatten_index(n, m)) == (n, m)

    def test_table_matches_flattening(self):
        degrees, orders = harmonic_table(5)
        assert len(degrees) == harmonic_count(5) == 36
        for index, (n, m) in enumerate(zip(degrees, orders)):
            assert flatten_index(int(n), int(m)) == index

    def test_invalid_index(self):
        with pytest.raises(DomainError):
            HarmonicIndex(2, 3)
        with pytest.raises(DomainError):
            unflatten_index(-1)
        assert HarmonicIndex.from_flat(7) == HarmonicIndex(2, 1)


class TestRadial:
    def test_closed_forms(self):
        x = np.array([0.3, 1.0, 4.5, 20.0])
        assert_allclose(sph_bessel_j(0, x), np.sin(x) / x, rtol=1e-13)
        assert_allclose(sph_hankel1(0, x), -1j * np.exp(1j * x) / x, rtol=1e-13)
        assert_allclose(sph_hankel1(1, x), -np.exp(1j * x) * (x + 1j) / x ** 2, rtol=1e-13)

    def test_hankel_singular_at_zero(self):
        with pytest.raises(SingularityError):
            sph_hankel1(0, 0.0)
        assert sph_bessel_j(0, 0.0) == pytest.approx(1.0)


class TestSphericalHarmonics:
    def test_y00_is_one(self):
        assert sph_harmonic(0, 0, 0.7, 1.3) == pytest.approx(1.0)

    def test_negative_order_is_conjugate(self):
        for n in range(1, 6):
            for m in range(1, n + 1):
                assert_allclose(sph_harmonic(n, -m, 1.1, 0.4), np.conj(sph_harmonic(n, m, 1.1, 0.4)), atol=1e-14)

    def test_addition_theorem_for_legendre(self):
        rng = np.random.default_rng(3)
        u, v = rng.normal(size=(2, 3))
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        n_max = 8
        yu = spherical_harmonics(n_max, np.array([u[2]]), np.array([np.arctan2(u[1], u[0])]))[0]
        yv = spherical_harmonics(n_max, np.array([v[2]]), np.array([np.arctan2(v[1], v[0])]))[0]
        degrees, _ = harmonic_table(n_max)
        for n in range(n_max + 1):
            sel = degrees == n
            assert_allclose(np.sum(yu[sel] * np.conj(yv[sel])), special.eval_legendre(n, u @ v), atol=1e-12)

    def test_polar_angle_range(self):
        with pytest.raises(DomainError):
            sph_harmonic(1, 0, 4.0, 0.0)


class TestSolidHarmonics:
    def test_singular_undefined_at_origin(self):
        with pytest.raises(SingularityError):
            singular_solid_harmonics(3, np.zeros((1, 3)), 1.0)

    def test_regular_at_origin(self):
        values = regular_solid_harmonics(4, np.zeros((1, 3)), 2.0)[0]
        expected = np.zeros(harmonic_count(4), dtype=complex)
        expected[0] = 1.0
        assert_allclose(values, expected, atol=1e-15)

    def test_gradient_at_origin(self):
        k = 2.5
        _, grads = regular_solid_harmonics_gradient(2, np.zeros((1, 3)), k)
        assert_allclose(grads[0, flatten_index(1, 0)], [0.0, 0.0, k / 3.0], atol=1e-14)
        assert_allclose(grads[0, flatten_index(0, 0)], np.zeros(3), atol=1e-14)

    def test_gradient_matches_finite_differences(self):
        k, step = 3.0, 1e-5
        points = np.array([[0.2, -0.1, 0.3], [0.0, 0.0, 0.4], [0.1, 0.25, -0.05]])
        values, grads = regular_solid_harmonics_gradient(5, points, k)
        assert_allclose(values, regular_solid_harmonics(5, points, k), rtol=1e-13, atol=1e-15)
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = step
            fd = (regular_solid_harmonics(5, points + shift, k) - regular_solid_harmonics(5, points - shift, k)) / (2 * step)
            assert_allclose(grads[..., axis], fd, atol=1e-7)

    def test_scalar_helpers(self):
        v = np.array([0.3, 0.4, 1.2])
        r = np.linalg.norm(v)
        theta, phi = np.arccos(v[2] / r), np.arctan2(v[1], v[0])
        assert solid_regular_I(2, 1, v, 1.5) == pytest.approx(sph_bessel_j(2, 1.5 * r) * sph_harmonic(2, 1, theta, phi))
        assert solid_singular_O(3, -2, v, 1.5) == pytest.approx(sph_hankel1(3, 1.5 * r) * sph_harmonic(3, -2, theta, phi))


class TestCoupling:
    def test_wigner3j_against_sympy(self):
        wigner = pytest.importorskip("sympy.physics.wigner")
        cases = [(1, 1, 0, 0, 0, 0), (2, 1, 1, 1, -1, 0), (3, 2, 1, -2, 1, 1), (4, 4, 2, 2, -3, 1),
                 (5, 3, 4, 0, 0, 0), (6, 6, 6, 1, 2, -3), (2, 2, 3, 0, 0, 0)]
        for case in cases:
            assert wigner3j(*case) == pytest.approx(float(wigner.wigner_3j(*case)), abs=1e-14)

    def test_wigner3j_selection_rules(self):
        assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0
        assert wigner3j(2, 2, 2, 1, 1, 1) == 0.0
        assert wigner3j(1, 1, 1, 2, -1, -1) == 0.0

    def test_identity_coefficient(self):
        for n in range(8):
            for m in range(-n, n + 1):
                assert addition_coefficient(0, 0, n, m, n) == pytest.approx((-1) ** n)

    def test_coupling_degrees_parity(self):
        assert list(coupling_degrees(2, 3, 0)) == [1, 3, 5]
        assert list(coupling_degrees(2, 3, 4)) == [5]
        assert list(coupling_degrees(2, 2, 0)) == [0, 2, 4]

    @staticmethod
    def _translated(kind, np_, mp, a, d, k, n_max):
        solid = regular_solid_harmonics if kind == "I" else singular_solid_harmonics
        regular_a = regular_solid_harmonics(n_max, a, k)[0]
        shifted = solid(np_ + n_max, d, k)[0]
        total = 0j
        for n in range(n_max + 1):
            for m in range(-n, n + 1):
                inner = 0j
                for l in coupling_degrees(n, np_, m + mp):
                    inner += addition_coefficient(np_, mp, n, m, l) * shifted[flatten_index(l, m + mp)]
                total += (2 * n + 1) * np.conj(regular_a[flatten_index(n, m)]) * inner
        return total

    @pytest.mark.parametrize("np_,mp", [(0, 0), (1, -1), (2, 1), (3, 3)])
    def test_regular_addition_theorem(self, np_, mp):
        k = 1.7
        a = np.array([[0.2, -0.1, 0.15]])
        d = np.array([[0.3, 0.5, -0.4]])
        expected = solid_regular_I(np_, mp, (a + d)[0], k)
        assert self._translated("I", np_, mp, a, d, k, 14) == pytest.approx(expected, abs=1e-11)

    @pytest.mark.parametrize("np_,mp", [(0, 0), (1, 1), (2, -2), (3, 0)])
    def test_singular_addition_theorem(self, np_, mp):
        k = 2.0
        a = np.array([[0.1, 0.2, -0.1]])
        d = np.array([[1.0, 0.5, 0.8]])
        expected = solid_singular_O(np_, mp, (a + d)[0], k)
        assert self._translated("O", np_, mp, a, d, k, 24) == pytest.approx(expected, rel=1e-8)
