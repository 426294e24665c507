"""
Builders for the standard study setups: a rigid sphere array under plane-wave
incidence and three sonic barrier types above a rigid ground.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from fmpbem.numerics.geometry import (HalfSpace, Lattice, SurfaceMesh, generate_cshape_mesh, generate_cylinder_mesh,
                                      generate_plate_mesh, generate_sphere_mesh)
from fmpbem.numerics.kernels import IncidentField, Monopole, PlaneWave
from fmpbem.numerics.postproc import ObservationGrid, observation_grid

GROUND = HalfSpace(axis=2, offset=0.0, reflection=1.0)


@dataclass(frozen=True, eq=False)
class SceneSetup:
    cell: SurfaceMesh
    lattice: Lattice
    half_space: Optional[HalfSpace]
    field: IncidentField
    grid: Optional[ObservationGrid] = None


def sphere_array(radius: float = 0.1, pitch: float = 0.35, counts: Tuple[int, int, int] = (5, 5, 1),
                 refinement: int = 4, amplitude: complex = 1.0,
                 grid_counts: Tuple[int, int] = (10, 10)) -> SceneSetup:
    """Array in the x-y plane, plane wave along +x, observation plane behind the array"""
    cell = generate_sphere_mesh(radius, refinement)
    lattice = Lattice(counts=counts, pitches=(pitch, pitch, pitch))
    depth = (counts[0] - 1) * pitch + radius
    width = (counts[1] - 1) * pitch
    grid = observation_grid((depth + 2 * radius, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, width, 0.0),
                            grid_counts, label="behind array")
    return SceneSetup(cell=cell, lattice=lattice, half_space=None,
                      field=IncidentField(sources=(PlaneWave((1.0, 0.0, 0.0), amplitude),)), grid=grid)


def barrier_sources(half_space: Optional[HalfSpace] = GROUND) -> IncidentField:
    return IncidentField(sources=(Monopole((-4.0, 6.5, 1.0), 2.0), Monopole((-4.0, 3.5, 1.0), 1.0)),
                         half_space=half_space)


def barrier_grid(counts: Tuple[int, int] = (40, 80)) -> ObservationGrid:
    """Shadow-zone area at z = 1.5 m, x in [1.5, 9.5], y in [0.5, 9.5]"""
    return observation_grid((1.5, 0.5, 1.5), (8.0, 0.0, 0.0), (0.0, 9.0, 0.0), counts, label="shadow zone")


def wall_cell(panel: float = 0.2, thickness: float = 0.1, divisions: int = 2) -> SurfaceMesh:
    """Front (normal -x, at x = 0) and back (normal +x, at x = thickness) panels of one wall cell"""
    front = generate_plate_mesh((0.0, 0.0, 0.0), (0.0, panel, 0.0), (0.0, 0.0, panel), divisions, divisions,
                                normal_sign=-1)
    back = generate_plate_mesh((thickness, 0.0, 0.0), (0.0, panel, 0.0), (0.0, 0.0, panel), divisions, divisions,
                               normal_sign=1)
    return SurfaceMesh.concatenate([front, back])


def wall_barrier(counts: Tuple[int, int, int] = (1, 50, 10), panel: float = 0.2, thickness: float = 0.1,
                 divisions: int = 2, grid_counts: Tuple[int, int] = (40, 80)) -> SceneSetup:
    """
    Front and back panel layers of a thin wall standing on the ground;
    top and side caps are not modelled.
    """
    cell = wall_cell(panel, thickness, divisions)
    lattice = Lattice(counts=counts, pitches=(thickness, panel, panel))
    return SceneSetup(cell=cell, lattice=lattice, half_space=GROUND, field=barrier_sources(),
                      grid=barrier_grid(grid_counts))


def cylinder_barrier(radius: float = 0.1, pitch: float = 0.4, counts: Tuple[int, int, int] = (3, 25, 5),
                     cell_height: float = 0.4, n_circ: int = 12, n_height: int = 4,
                     grid_counts: Tuple[int, int] = (40, 80)) -> SceneSetup:
    cell = generate_cylinder_mesh(radius, cell_height, n_circ, n_height)
    lattice = Lattice(counts=counts, pitches=(pitch, pitch, cell_height))
    return SceneSetup(cell=cell, lattice=lattice, half_space=GROUND, field=barrier_sources(),
                      grid=barrier_grid(grid_counts))


def cshape_barrier(outer: float = 0.1, inner: float = 0.08, slit: float = 0.04, pitch: float = 0.4,
                   counts: Tuple[int, int, int] = (3, 25, 5), cell_height: float = 0.4,
                   n_circ: int = 12, n_height: int = 4, slit_angle: float = np.pi,
                   grid_counts: Tuple[int, int] = (40, 80)) -> SceneSetup:
    """C-shaped resonators with the slit facing the sources (-x) by default"""
    cell = generate_cshape_mesh(outer, inner, slit, cell_height, n_circ, n_height, slit_angle=slit_angle)
    lattice = Lattice(counts=counts, pitches=(pitch, pitch, cell_height))
    return SceneSetup(cell=cell, lattice=lattice, half_space=GROUND, field=barrier_sources(),
                      grid=barrier_grid(grid_counts))
