import numpy as np
import pytest
from numpy.testing import assert_allclose

from fmpbem.numerics.errors import DomainError, SingularityError
from fmpbem.numerics.geometry import HalfSpace, SurfaceMesh, generate_plate_mesh
from fmpbem.numerics.kernels import (FOUR_PI, IncidentField, Monopole, PlaneWave, QuadratureSettings, WaveContext,
                                     element_influence, green_full, green_half, incident_values, influence_matrices,
                                     kernel_derivatives)


def square(side, center=(0.0, 0.0, 0.0)):
    s = 0.5 * side
    corners = np.array([[[-s, -s, 0.0], [s, -s, 0.0], [s, s, 0.0], [-s, s, 0.0]]]) + np.asarray(center)
    return SurfaceMesh.from_corners(corners)


class TestWaveContext:
    def test_default_coupling(self):
        ctx = WaveContext(frequency=343.0 / (2 * np.pi))
        assert ctx.k == pytest.approx(1.0)
        assert ctx.alpha == pytest.approx(-1j)

    def test_real_coupling_rejected(self):
        with pytest.raises(DomainError):
            WaveContext(frequency=100.0, alpha=0.5)

    def test_nonpositive_frequency(self):
        with pytest.raises(DomainError):
            WaveContext(frequency=0.0)


class TestPointKernels:
    def test_green_value(self):
        ctx = WaveContext(frequency=200.0)
        x, y = np.array([0.1, 0.2, 0.3]), np.array([1.0, -0.5, 0.2])
        r = np.linalg.norm(x - y)
        assert green_full(ctx, x, y) == pytest.approx(np.exp(1j * ctx.k * r) / (FOUR_PI * r))

    def test_coincident_points(self):
        with pytest.raises(SingularityError):
            green_full(WaveContext(frequency=100.0), np.zeros(3), np.zeros(3))

    def test_half_space_doubles_on_the_plane(self):
        ctx = WaveContext(frequency=300.0)
        hs = HalfSpace(axis=2, offset=0.0, reflection=1.0)
        x, y = np.array([0.4, 0.1, 0.0]), np.array([-0.2, 0.3, 0.7])
        assert green_half(ctx, x, y, hs) == pytest.approx(2.0 * green_full(ctx, x, y))

    def test_derivatives_match_finite_differences(self):
        ctx = WaveContext(frequency=500.0)
        x, y = np.array([0.3, -0.2, 0.5]), np.array([-0.1, 0.4, 0.0])
        n_x = np.array([1.0, 2.0, -1.0]) / np.sqrt(6.0)
        n_y = np.array([0.0, 0.6, 0.8])
        g, dg_dny, dg_dnx, d2g = kernel_derivatives(ctx, x, y, n_x, n_y)
        step = 1e-6
        fd_ny = (green_full(ctx, x, y + step * n_y) - green_full(ctx, x, y - step * n_y)) / (2 * step)
        fd_nx = (green_full(ctx, x + step * n_x, y) - green_full(ctx, x - step * n_x, y)) / (2 * step)
        assert dg_dny == pytest.approx(fd_ny, rel=1e-7)
        assert dg_dnx == pytest.approx(fd_nx, rel=1e-7)

        def dny(point):
            return kernel_derivatives(ctx, point, y, n_x, n_y)[1]
        fd_both = (dny(x + step * n_x) - dny(x - step * n_x)) / (2 * step)
        assert d2g == pytest.approx(fd_both, rel=1e-6)


class TestElementIntegrals:
    def test_self_single_layer_static_limit(self):
        side = 0.1
        ctx = WaveContext(frequency=1.0, alpha=1j)
        _, g = element_influence(ctx, square(side), np.zeros(3), np.array([0.0, 0.0, 1.0]), self_term=True)
        assert g.real == pytest.approx(4.0 * np.log(1.0 + np.sqrt(2.0)) * side / FOUR_PI, rel=1e-6)

    def test_self_hypersingular_static_limit(self):
        half_side = 0.05
        ctx = WaveContext(frequency=1.0, alpha=1j)
        h, _ = element_influence(ctx, square(2 * half_side), np.zeros(3), np.array([0.0, 0.0, 1.0]), self_term=True)
        assert h == pytest.approx(-ctx.alpha * np.sqrt(2.0) / (np.pi * half_side), rel=1e-5)

    def test_far_element_matches_point_rule(self):
        ctx = WaveContext(frequency=100.0)
        element = square(0.01, center=(0.0, 0.0, 0.0))
        x = np.array([3.0, 1.0, 2.0])
        n_x = np.array([0.0, 1.0, 0.0])
        h, g = element_influence(ctx, element, x, n_x)
        G, dg_dny, dg_dnx, d2g = kernel_derivatives(ctx, x, element.centers[0], n_x, element.normals[0])
        area = element.areas[0]
        assert g == pytest.approx(area * (G + ctx.alpha * dg_dnx), rel=1e-4)
        assert h == pytest.approx(area * (dg_dny + ctx.alpha * d2g), rel=1e-4)

    def test_near_subdivision_converges(self):
        ctx = WaveContext(frequency=300.0)
        element = square(0.1)
        x = np.array([0.02, 0.01, 0.03])
        n_x = np.array([0.0, 0.0, 1.0])
        coarse = element_influence(ctx, element, x, n_x, QuadratureSettings(order=8, max_subdivision=3))
        fine = element_influence(ctx, element, x, n_x, QuadratureSettings(order=12, max_subdivision=5))
        assert coarse[1] == pytest.approx(fine[1], rel=1e-3)

    def test_pairs_on_the_near_threshold_do_not_depend_on_the_frame(self):
        ctx = WaveContext(frequency=500.0)
        element = square(0.1)
        settings = QuadratureSettings()
        n_x = np.array([[0.0, 0.0, 1.0]])
        reach = settings.near_threshold * element.diameters[0]
        for distance in (reach, 0.5 * reach, 0.25 * reach):
            x = np.array([[distance, 0.0, 0.0]])
            reference = influence_matrices(ctx, x, n_x, element, settings=settings)
            for shift in (np.array([0.37, -1.21, 2.9]), np.array([1e3 / 7, 0.1, -0.3])):
                moved = influence_matrices(ctx, x + shift, n_x, element.translated(shift), settings=settings)
                for k in range(2):
                    assert_allclose(moved[k], reference[k], rtol=1e-10, atol=1e-14)

    def test_image_only_requires_half_space(self):
        plate = generate_plate_mesh((0, 0, 1), (1, 0, 0), (0, 1, 0), 2, 2)
        with pytest.raises(DomainError):
            influence_matrices(WaveContext(frequency=100.0), plate.centers, plate.normals, plate, image_only=True)

    def test_half_space_adds_image(self):
        ctx = WaveContext(frequency=150.0)
        plate = generate_plate_mesh((0, 0, 1), (0.4, 0, 0), (0, 0.4, 0), 2, 2)
        hs = HalfSpace(axis=2, offset=0.0, reflection=0.5)
        x = np.array([[0.2, 0.2, 2.0]])
        n = np.array([[0.0, 0.0, 1.0]])
        direct = influence_matrices(ctx, x, n, plate)
        image = influence_matrices(ctx, x, n, plate.mirrored(hs))
        both = influence_matrices(ctx, x, n, plate, half_space=hs)
        only = influence_matrices(ctx, x, n, plate, half_space=hs, image_only=True)
        for k in range(2):
            assert_allclose(both[k], direct[k] + 0.5 * image[k], rtol=1e-12)
            assert_allclose(only[k], 0.5 * image[k], rtol=1e-12)


class TestIncidentFields:
    def test_plane_wave(self):
        ctx = WaveContext(frequency=250.0)
        field = IncidentField(sources=(PlaneWave((0.0, 1.0, 0.0), 2.0),))
        x = np.array([[0.0, 0.3, 0.0]])
        p, dp = incident_values(field, ctx, x, np.array([0.0, 1.0, 0.0]))
        assert p[0] == pytest.approx(2.0 * np.exp(1j * ctx.k * 0.3))
        assert dp[0] == pytest.approx(1j * ctx.k * p[0])

    def test_plane_wave_direction_must_be_unit(self):
        with pytest.raises(DomainError):
            PlaneWave((1.0, 1.0, 0.0))

    def test_monopole_strength_at_one_metre(self):
        ctx = WaveContext(frequency=100.0)
        field = IncidentField(sources=(Monopole((0.0, 0.0, 0.0), 2.0),))
        p, _ = incident_values(field, ctx, np.array([[1.0, 0.0, 0.0]]), np.array([1.0, 0.0, 0.0]))
        assert abs(p[0]) == pytest.approx(2.0)

    def test_rigid_ground_doubles_at_the_plane(self):
        ctx = WaveContext(frequency=100.0)
        source = Monopole((-4.0, 6.5, 1.0), 1.0)
        free = IncidentField(sources=(source,))
        ground = IncidentField(sources=(source,), half_space=HalfSpace(axis=2, offset=0.0, reflection=1.0))
        x = np.array([[2.0, 3.0, 0.0]])
        n = np.array([0.0, 0.0, 1.0])
        p_free, _ = incident_values(free, ctx, x, n)
        p_ground, dp_ground = incident_values(ground, ctx, x, n)
        assert p_ground[0] == pytest.approx(2.0 * p_free[0])
        assert dp_ground[0] == pytest.approx(0.0, abs=1e-12)
