import numpy as np
import pytest
from numpy.testing import assert_allclose

from fmpbem.numerics.assembly import assemble_dense, assemble_rhs, check_half_space, periodic_operator
from fmpbem.numerics.fmm import FmmConfig, assemble_periodic_fmm
from fmpbem.numerics.geometry import replicate_lattice
from fmpbem.numerics.kernels import WaveContext
from fmpbem.numerics.postproc import evaluate_field, insertion_loss
from fmpbem.numerics.scenes import (GROUND, barrier_grid, cshape_barrier, cylinder_barrier, sphere_array,
                                    wall_barrier, wall_cell)
from fmpbem.numerics.solver import gmres


def solve_il(setup, ctx, apply):
    mesh = replicate_lattice(setup.cell, setup.lattice)
    rhs = assemble_rhs(mesh, ctx, setup.field)
    report = gmres(apply, rhs, tol=1e-8)
    assert report.converged
    points = setup.grid.points
    total = evaluate_field(mesh, report.solution, ctx, setup.field, points)
    incident = evaluate_field(mesh, np.zeros(mesh.n_elements), ctx, setup.field, points)
    return insertion_loss(incident, total)


class TestSetups:
    def test_sphere_array_defaults(self):
        setup = sphere_array()
        assert setup.cell.n_elements == 96
        assert setup.lattice.counts == (5, 5, 1)
        assert setup.half_space is None
        setup.lattice.check_cell(setup.cell)
        assert setup.grid.points[:, 0].min() > 4 * 0.35 + 0.1

    def test_wall_cell_panels(self):
        cell = wall_cell(panel=0.2, thickness=0.1, divisions=2)
        assert cell.n_elements == 8
        assert_allclose(cell.normals[:4], np.tile([-1.0, 0.0, 0.0], (4, 1)), atol=1e-14)
        assert_allclose(cell.normals[4:], np.tile([1.0, 0.0, 0.0], (4, 1)), atol=1e-14)
        assert_allclose(cell.extent, [0.1, 0.2, 0.2])

    @pytest.mark.parametrize("builder", [wall_barrier, cylinder_barrier, cshape_barrier])
    def test_barriers_stand_on_the_ground(self, builder):
        setup = builder()
        assert setup.half_space == GROUND
        assert setup.field.half_space == GROUND
        setup.lattice.check_cell(setup.cell)
        check_half_space(setup.cell, setup.lattice, setup.half_space)
        assert setup.grid.n_points == 40 * 80

    def test_barrier_sources(self):
        setup = wall_barrier()
        strengths = sorted(abs(s.strength) for s in setup.field.sources)
        assert strengths == [1.0, 2.0]

    def test_shadow_zone(self):
        grid = barrier_grid((5, 7))
        assert grid.points[:, 0].min() == pytest.approx(1.5)
        assert grid.points[:, 1].max() == pytest.approx(9.5)
        assert_allclose(grid.points[:, 2], 1.5)


class TestSmallStudies:
    def test_sphere_array_methods_agree(self):
        setup = sphere_array(counts=(2, 2, 1), refinement=2, grid_counts=(3, 3))
        ctx = WaveContext(frequency=500.0)
        dense = assemble_dense(replicate_lattice(setup.cell, setup.lattice), ctx, setup.field)
        pbem = periodic_operator(setup.cell, setup.lattice, ctx)
        il_dense = solve_il(setup, ctx, dense.A)
        il_pbem = solve_il(setup, ctx, pbem.matvec)
        assert il_pbem == pytest.approx(il_dense, abs=1e-6)

    def test_reduced_wall_methods_agree(self):
        setup = wall_barrier(counts=(1, 4, 2), grid_counts=(4, 4))
        ctx = WaveContext(frequency=200.0)
        dense = assemble_dense(replicate_lattice(setup.cell, setup.lattice), ctx, setup.field)
        pbem = periodic_operator(setup.cell, setup.lattice, ctx, setup.half_space)
        assert abs(solve_il(setup, ctx, pbem.matvec) - solve_il(setup, ctx, dense.A)) < 1e-6

    @pytest.mark.slow
    def test_reduced_wall_fmpbem_against_dense(self):
        setup = wall_barrier(counts=(1, 10, 4), grid_counts=(10, 20))
        for frequency in (150.0, 210.0, 280.0):
            ctx = WaveContext(frequency=frequency)
            dense = assemble_dense(replicate_lattice(setup.cell, setup.lattice), ctx, setup.field)
            fmm = assemble_periodic_fmm(setup.cell, setup.lattice, ctx, FmmConfig(n_t=4), setup.half_space)
            assert abs(solve_il(setup, ctx, fmm.matvec) - solve_il(setup, ctx, dense.A)) < 0.1
