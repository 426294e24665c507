import numpy as np
import pytest
from numpy.testing import assert_allclose

from fmpbem.numerics.errors import ConfigurationError, DomainError
from fmpbem.numerics.geometry import (HalfSpace, Lattice, SurfaceMesh, admissible, box_radius,
                                      generate_cshape_mesh, generate_cylinder_mesh, generate_plate_mesh,
                                      generate_sphere_mesh, mirror_point, near_offsets, read_mesh,
                                      replicate_lattice, write_mesh)


class TestSphereMesh:
    def test_element_count_and_area(self):
        mesh = generate_sphere_mesh(0.5, 8)
        assert mesh.n_elements == 6 * 8 ** 2
        assert mesh.check() == []
        assert mesh.areas.sum() == pytest.approx(4 * np.pi * 0.25, rel=0.02)

    def test_normals_point_outward(self):
        mesh = generate_sphere_mesh(1.0, 4, center=(1.0, 2.0, 3.0))
        outward = mesh.centers - np.array([1.0, 2.0, 3.0])
        assert np.all(np.einsum("ei,ei->e", outward, mesh.normals) > 0)

    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            generate_sphere_mesh(-1.0, 2)
        with pytest.raises(DomainError):
            generate_sphere_mesh(1.0, 0)


class TestOtherMeshes:
    def test_plate_orientation(self):
        plate = generate_plate_mesh((0, 0, 0), (0, 1, 0), (0, 0, 1), 3, 2, normal_sign=-1)
        assert plate.n_elements == 6
        assert_allclose(plate.normals, np.tile([-1.0, 0.0, 0.0], (6, 1)), atol=1e-14)
        assert plate.areas.sum() == pytest.approx(1.0)

    def test_cylinder_normals_radial(self):
        mesh = generate_cylinder_mesh(0.1, 0.4, 12, 4)
        assert mesh.n_elements == 48
        radial = mesh.centers * np.array([1.0, 1.0, 0.0])
        assert np.all(np.einsum("ei,ei->e", radial, mesh.normals) > 0)
        assert_allclose(mesh.normals[:, 2], 0.0, atol=1e-14)
        assert mesh.extent[2] == pytest.approx(0.4)

    def test_cshape_walls(self):
        mesh = generate_cshape_mesh(0.1, 0.08, 0.04, 0.4, 12, 4)
        assert mesh.n_elements == 2 * 48 + 2 * 4
        assert mesh.check() == []
        radial = np.linalg.norm(mesh.centers[:, :2], axis=1)
        outer = mesh.normals[:48]
        inner = mesh.normals[48:96]
        assert np.all(np.einsum("ei,ei->e", mesh.centers[:48] * [1, 1, 0], outer) > 0)
        assert np.all(np.einsum("ei,ei->e", mesh.centers[48:96] * [1, 1, 0], inner) < 0)
        assert radial.max() < 0.1

    def test_cshape_rejects_bad_slit(self):
        with pytest.raises(DomainError):
            generate_cshape_mesh(0.1, 0.08, 0.2, 0.4, 12, 4)


class TestMeshFile:
    def test_write_then_read(self, tmp_path):
        mesh = generate_sphere_mesh(0.2, 2, beta=0.1 + 0.2j)
        path = tmp_path / "cell.txt"
        write_mesh(mesh, path)
        assert path.read_text().splitlines()[0] == "24"
        loaded = read_mesh(path)
        assert_allclose(loaded.corners, mesh.corners, rtol=0, atol=1e-15)
        assert_allclose(loaded.normals, mesh.normals, atol=1e-12)
        assert_allclose(loaded.beta, mesh.beta)

    def test_bad_row_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n" + " ".join(["0"] * 14) + "\n")
        with pytest.raises(DomainError):
            read_mesh(path)


class TestHalfSpace:
    def test_mirror(self):
        plane = HalfSpace(axis=2, offset=0.5)
        assert_allclose(mirror_point((1.0, 2.0, 3.0), plane), [1.0, 2.0, -2.0])
        assert_allclose(plane.mirror(plane.mirror(np.array([[0.1, 0.2, 0.3]]))), [[0.1, 0.2, 0.3]])

    def test_mirrored_mesh_keeps_normals_outward(self):
        sphere = generate_sphere_mesh(0.3, 2, center=(0.0, 0.0, 1.0))
        image = sphere.mirrored(HalfSpace(axis=2))
        outward = image.centers - np.array([0.0, 0.0, -1.0])
        assert np.all(np.einsum("ei,ei->e", outward, image.normals) > 0)

    def test_invalid_axis(self):
        with pytest.raises(DomainError):
            HalfSpace(axis=3)


class TestLattice:
    def test_offsets_natural_order(self):
        lattice = Lattice(counts=(3, 2, 1), pitches=(1.0, 1.0, 1.0))
        offsets = lattice.offsets()
        assert offsets.shape == (5 * 3 * 1, 3)
        assert tuple(offsets[0]) == (-2, -1, 0)
        assert tuple(offsets[1]) == (-1, -1, 0)
        assert tuple(offsets[-1]) == (2, 1, 0)

    def test_replicate_cell_major(self):
        cell = generate_sphere_mesh(0.1, 1)
        lattice = Lattice(counts=(2, 3, 1), pitches=(0.3, 0.4, 1.0))
        array = replicate_lattice(cell, lattice)
        assert array.n_elements == 6 * cell.n_elements
        block = array.centers.reshape(3, 2, cell.n_elements, 3)
        assert_allclose(block[2, 1] - cell.centers, np.tile([0.3, 0.8, 0.0], (cell.n_elements, 1)), atol=1e-15)
        assert lattice.cell_index(1, 2, 0) == 5

    def test_pitch_smaller_than_cell(self):
        lattice = Lattice(counts=(2, 1, 1), pitches=(0.1, 1.0, 1.0))
        with pytest.raises(ConfigurationError):
            lattice.check_cell(generate_sphere_mesh(0.1, 2))

    def test_touching_cells_are_allowed(self):
        Lattice(counts=(2, 1, 1), pitches=(0.2, 1.0, 1.0)).check_cell(generate_cylinder_mesh(0.1, 0.4, 12, 2))

    def test_invalid_counts(self):
        with pytest.raises(ConfigurationError):
            Lattice(counts=(0, 1, 1))
        with pytest.raises(ConfigurationError):
            Lattice(counts=(2, 1, 1), pitches=(0.0, 1.0, 1.0))


class TestBoxes:
    def test_sphere_array_has_nine_near_offsets(self):
        cell = generate_sphere_mesh(0.1, 4)
        lattice = Lattice(counts=(5, 5, 1), pitches=(0.35, 0.35, 0.35))
        assert box_radius(cell, lattice) == pytest.approx(0.5 * np.sqrt(2 * 0.35 ** 2 + 0.2 ** 2), rel=1e-2)
        near = near_offsets(cell, lattice)
        assert len(near) == 9
        assert set(near) == {(i, j, 0) for i in (-1, 0, 1) for j in (-1, 0, 1)}

    def test_admissibility_boundary(self):
        assert admissible((0, 0, 0), (2.0, 0, 0), 1.0)
        assert not admissible((0, 0, 0), (1.999, 0, 0), 1.0)
        with pytest.raises(DomainError):
            admissible((0, 0, 0), (1, 0, 0), 0.0)


class TestSurfaceMesh:
    def test_degenerate_element(self):
        corners = np.zeros((1, 4, 3))
        with pytest.raises(DomainError):
            SurfaceMesh.from_corners(corners)

    def test_with_beta_and_concatenate(self):
        a = generate_plate_mesh((0, 0, 0), (1, 0, 0), (0, 1, 0), 1, 1)
        b = a.translated((0.0, 0.0, 1.0)).with_beta(0.5)
        joined = SurfaceMesh.concatenate([a, b])
        assert joined.n_elements == 2
        assert_allclose(joined.beta, [0.0, 0.5])
        assert_allclose(joined.extent, [1.0, 1.0, 1.0])
