"""
Validation of scene files for fmpbem-run.

A scene file is YAML with the sections medium, geometry, lattice, half_space,
sources, sweep, method, fmm, solver and outputs. Every problem found is
collected in `errors` with its key path and line; a valid file resolves into
a frozen Scene in which every default has been made explicit.
"""
import os
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from fmpbem.numerics.errors import FmpbemError
from fmpbem.numerics.fmm import FmmConfig
from fmpbem.numerics.geometry import (HalfSpace, Lattice, SurfaceMesh, generate_cshape_mesh, generate_cylinder_mesh,
                                      generate_plate_mesh, generate_sphere_mesh, read_mesh)
from fmpbem.numerics.kernels import IncidentField, Monopole, PlaneWave
from fmpbem.numerics.postproc import ObservationGrid, observation_grid
from fmpbem.numerics.scenes import wall_cell


class ValidationError(Exception):
    """Raised when a scene file cannot be resolved"""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = list(errors or [message])


class Method(Enum):
    DENSE = "dense"
    PBEM = "pbem"
    FMPBEM = "fmpbem"


class GeometryType(Enum):
    SPHERE = "sphere"
    PLATE = "plate"
    WALL = "wall"
    CYLINDER = "cylinder"
    CSHAPE = "cshape"
    MESH = "mesh"


# (key, default) per generator; None marks a required key
GEOMETRY_KEYS: Dict[GeometryType, Dict[str, Any]] = {
    GeometryType.SPHERE: {'radius': None, 'refinement': 4, 'center': [0.0, 0.0, 0.0]},
    GeometryType.PLATE: {'origin': None, 'edge_u': None, 'edge_v': None, 'divisions': [2, 2], 'normal_sign': 1},
    GeometryType.WALL: {'panel': 0.2, 'thickness': 0.1, 'divisions': 2},
    GeometryType.CYLINDER: {'radius': None, 'height': None, 'n_circ': 12, 'n_height': 4},
    GeometryType.CSHAPE: {'outer_radius': None, 'inner_radius': None, 'slit_width': None, 'height': None,
                          'n_circ': 12, 'n_height': 4, 'slit_angle': float(np.pi)},
    GeometryType.MESH: {'path': None},
}


@dataclass(frozen=True)
class Medium:
    c: float = 343.0
    rho: float = 1.21


@dataclass(frozen=True)
class GeometrySpec:
    """Primitive generator or mesh file, with its resolved parameters"""
    type: GeometryType
    params: Dict[str, Any]
    beta: complex = 0.0

    def build_cell(self) -> SurfaceMesh:
        p = self.params
        if self.type is GeometryType.SPHERE:
            cell = generate_sphere_mesh(p['radius'], p['refinement'], center=p['center'])
        elif self.type is GeometryType.PLATE:
            cell = generate_plate_mesh(p['origin'], p['edge_u'], p['edge_v'], p['divisions'][0], p['divisions'][1],
                                       normal_sign=p['normal_sign'])
        elif self.type is GeometryType.WALL:
            cell = wall_cell(p['panel'], p['thickness'], p['divisions'])
        elif self.type is GeometryType.CYLINDER:
            cell = generate_cylinder_mesh(p['radius'], p['height'], p['n_circ'], p['n_height'])
        elif self.type is GeometryType.CSHAPE:
            cell = generate_cshape_mesh(p['outer_radius'], p['inner_radius'], p['slit_width'], p['height'],
                                        p['n_circ'], p['n_height'], slit_angle=p['slit_angle'])
        else:
            cell = read_mesh(p['path'])
            if self.beta == 0.0:
                return cell
        return cell.with_beta(self.beta)


@dataclass(frozen=True)
class Sweep:
    f_min: float
    f_max: float
    count: int = 1
    spacing: str = "linear"

    def frequencies(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.f_min])
        if self.spacing == "log":
            return np.geomspace(self.f_min, self.f_max, self.count)
        return np.linspace(self.f_min, self.f_max, self.count)


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-4
    restart: int = 100
    max_iter: int = 1000


@dataclass(frozen=True)
class GridSpec:
    origin: Tuple[float, float, float]
    edge_u: Tuple[float, float, float]
    edge_v: Tuple[float, float, float]
    counts: Tuple[int, int]

    def build(self, label: str) -> ObservationGrid:
        return observation_grid(self.origin, self.edge_u, self.edge_v, self.counts, label=label)


@dataclass(frozen=True)
class Outputs:
    directory: str
    il_grid: GridSpec
    field_plane: Optional[GridSpec] = None


@dataclass(frozen=True)
class Scene:
    name: str
    medium: Medium
    geometry: GeometrySpec
    lattice: Lattice
    half_space: Optional[HalfSpace]
    field: IncidentField
    sweep: Sweep
    method: Method
    fmm: FmmConfig
    solver: SolverSettings
    outputs: Outputs
    defaults_applied: Tuple[str, ...] = ()

    def with_method(self, method: Union[str, Method]) -> "Scene":
        return replace(self, method=Method(method))

    def with_output(self, directory: str) -> "Scene":
        return replace(self, outputs=replace(self.outputs, directory=str(directory)))

    def with_lattice(self, lattice: Lattice) -> "Scene":
        return replace(self, lattice=lattice)

    def to_dict(self) -> Dict[str, Any]:
        """Every resolved parameter as plain YAML-friendly values"""
        return {
            'name': self.name,
            'medium': {'c': self.medium.c, 'rho': self.medium.rho},
            'geometry': {'type': self.geometry.type.value, **_plain(self.geometry.params),
                         'beta': _plain(self.geometry.beta)},
            'lattice': {'counts': list(self.lattice.counts), 'pitches': list(self.lattice.pitches)},
            'half_space': None if self.half_space is None else {
                'axis': self.half_space.axis, 'offset': self.half_space.offset,
                'reflection': _plain(self.half_space.reflection)},
            'sources': [_source_dict(s) for s in self.field.sources],
            'sweep': {'f_min': self.sweep.f_min, 'f_max': self.sweep.f_max, 'count': self.sweep.count,
                      'spacing': self.sweep.spacing},
            'method': self.method.value,
            'fmm': {'n_t': self.fmm.n_t},
            'solver': {'tol': self.solver.tol, 'restart': self.solver.restart, 'max_iter': self.solver.max_iter},
            'outputs': {'directory': self.outputs.directory, 'il_grid': _grid_dict(self.outputs.il_grid),
                        'field_plane': None if self.outputs.field_plane is None
                        else _grid_dict(self.outputs.field_plane)},
            'defaults_applied': list(self.defaults_applied),
        }


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return float(value.real) if value.imag == 0 else [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _source_dict(source) -> Dict[str, Any]:
    if isinstance(source, PlaneWave):
        return {'type': 'plane_wave', 'direction': _plain(source.direction), 'amplitude': _plain(source.amplitude)}
    return {'type': 'monopole', 'position': _plain(source.position), 'strength': _plain(source.strength)}


def _grid_dict(grid: GridSpec) -> Dict[str, Any]:
    return {'origin': list(grid.origin), 'edge_u': list(grid.edge_u), 'edge_v': list(grid.edge_v),
            'counts': list(grid.counts)}


def _key_lines(text: str) -> Dict[str, int]:
    """Map dotted key paths to 1-based line numbers"""
    lines: Dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                child = f"{path}.{key.value}" if path else str(key.value)
                lines[child] = key.start_mark.line + 1
                walk(value, child)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                child = f"{path}[{i}]"
                lines[child] = item.start_mark.line + 1
                walk(item, child)

    if root is not None:
        walk(root, "")
    return lines


class YAMLSceneValidator:
    """
    Validates scene YAML files and resolves them into a Scene.

    Solver, fmm and grid defaults come from `defaults` (a SolverConfigReader)
    when given, otherwise from the library defaults.
    """

    SECTIONS = ('name', 'medium', 'geometry', 'lattice', 'half_space', 'sources', 'sweep', 'method', 'fmm',
                'solver', 'outputs')

    def __init__(self, yaml_file_path: Optional[str] = None, yaml_content: Optional[str] = None,
                 defaults=None):
        """
        Initialize the validator with either a file path or YAML content string.

        Args:
            yaml_file_path: Path to the scene file to validate
            yaml_content: Scene as a YAML string
            defaults: optional SolverConfigReader supplying solver and fmm defaults
        """
        self.yaml_file_path = yaml_file_path
        self.yaml_content = yaml_content
        self.defaults = defaults
        self.data: Optional[Dict] = None
        self.errors: List[str] = []
        self.defaults_applied: List[str] = []
        self.scene: Optional[Scene] = None
        self._lines: Dict[str, int] = {}

        if yaml_file_path or yaml_content:
            self.validate()

    def _load_yaml(self) -> Dict:
        """
        Load YAML data from a file or a string.

        Raises:
            ValidationError: If no YAML source is provided, if the YAML format is
            invalid, or if the file is not found.
        """
        try:
            if self.yaml_file_path:
                with open(self.yaml_file_path, 'r') as file:
                    text = file.read()
            elif self.yaml_content:
                text = self.yaml_content
            else:
                raise ValidationError("No YAML file path or content provided")
            self._lines = _key_lines(text)
            return yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ValidationError(f"Invalid YAML format: {e}")
        except FileNotFoundError:
            raise ValidationError(f"File not found: {self.yaml_file_path}")

    # ------------------------------------------------------------------
    # Error and value helpers
    # ------------------------------------------------------------------

    def _error(self, path: str, message: str) -> None:
        line = self._lines.get(path)
        where = f"{path} (line {line})" if line else path
        self.errors.append(f"{where}: {message}")

    def _get(self, section: Dict, key: str, path: str, default: Any = None, required: bool = False) -> Any:
        if key in section and section[key] is not None:
            return section[key]
        if required:
            self._error(path, "missing required key")
            return None
        self.defaults_applied.append(path)
        return default

    def _number(self, value: Any, path: str, positive: bool = False, minimum: Optional[float] = None,
                integer: bool = False) -> Optional[float]:
        if value is None:
            return None
        if isinstance(value, str):
            # YAML 1.1 reads 1e-4 (no dot) as a string
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self._error(path, f"must be a number, got {type(value).__name__}")
            return None
        if integer and int(value) != value:
            self._error(path, f"must be an integer, got {value}")
            return None
        if positive and not value > 0:
            self._error(path, f"must be positive, got {value}")
            return None
        if minimum is not None and value < minimum:
            self._error(path, f"must be >= {minimum}, got {value}")
            return None
        return int(value) if integer else float(value)

    def _complex(self, value: Any, path: str) -> Optional[complex]:
        """A real number or a [re, im] pair"""
        if isinstance(value, (list, tuple)) and len(value) == 2:
            parts = [self._number(v, f"{path}[{i}]") for i, v in enumerate(value)]
            if None in parts:
                return None
            return complex(parts[0], parts[1])
        number = self._number(value, path)
        return None if number is None else complex(number)

    def _vector(self, value: Any, path: str, length: int = 3, integer: bool = False,
                positive: bool = False) -> Optional[Tuple]:
        if value is None:
            return None
        if not isinstance(value, (list, tuple)) or len(value) != length:
            self._error(path, f"must be a list of {length} numbers")
            return None
        items = [self._number(v, f"{path}[{i}]", integer=integer, positive=positive) for i, v in enumerate(value)]
        if any(v is None for v in items):
            return None
        return tuple(items)

    def _mapping(self, key: str, required: bool = False) -> Optional[Dict]:
        value = self.data.get(key)
        if value is None:
            if required:
                self._error(key, "missing required section")
            return None if required else {}
        if not isinstance(value, dict):
            self._error(key, "must be a mapping")
            return None
        return value

    # ------------------------------------------------------------------
    # Sections
    # ------------------------------------------------------------------

    def _validate_medium(self) -> Optional[Medium]:
        section = self._mapping('medium')
        if section is None:
            return None
        c = self._number(self._get(section, 'c', 'medium.c', 343.0), 'medium.c', positive=True)
        rho = self._number(self._get(section, 'rho', 'medium.rho', 1.21), 'medium.rho', positive=True)
        if c is None or rho is None:
            return None
        return Medium(c=c, rho=rho)

    def _validate_geometry(self) -> Optional[GeometrySpec]:
        section = self._mapping('geometry', required=True)
        if section is None:
            return None
        kind = section.get('type')
        try:
            geometry_type = GeometryType(kind)
        except ValueError:
            valid = ", ".join(t.value for t in GeometryType)
            self._error('geometry.type', f"unknown geometry '{kind}', expected one of: {valid}")
            return None

        params: Dict[str, Any] = {}
        ok = True
        for key, default in GEOMETRY_KEYS[geometry_type].items():
            path = f"geometry.{key}"
            value = self._get(section, key, path, default, required=default is None)
            if value is None:
                ok = False
                continue
            if key in ('center', 'origin', 'edge_u', 'edge_v'):
                value = self._vector(value, path)
            elif key == 'divisions' and geometry_type is GeometryType.PLATE:
                value = self._vector(value, path, length=2, integer=True, positive=True)
            elif key == 'path':
                value = self._mesh_path(value, path)
            elif key in ('refinement', 'divisions', 'n_circ', 'n_height'):
                value = self._number(value, path, positive=True, integer=True)
            elif key == 'normal_sign':
                if value not in (-1, 1):
                    self._error(path, f"must be 1 or -1, got {value}")
                    value = None
            elif key == 'slit_angle':
                value = self._number(value, path)
            else:
                value = self._number(value, path, positive=True)
            if value is None:
                ok = False
            params[key] = value

        unknown = set(section) - set(GEOMETRY_KEYS[geometry_type]) - {'type', 'beta'}
        for key in sorted(unknown):
            self._error(f"geometry.{key}", f"unknown key for geometry type '{geometry_type.value}'")
            ok = False

        beta = self._complex(self._get(section, 'beta', 'geometry.beta', 0.0), 'geometry.beta')
        if not ok or beta is None:
            return None
        return GeometrySpec(type=geometry_type, params=params, beta=beta)

    def _mesh_path(self, value: Any, path: str) -> Optional[str]:
        if not isinstance(value, str):
            self._error(path, "must be a string")
            return None
        mesh_path = Path(value).expanduser()
        if not mesh_path.is_absolute() and self.yaml_file_path:
            mesh_path = Path(self.yaml_file_path).parent / mesh_path
        if not mesh_path.is_file():
            self._error(path, f"mesh file not found: {mesh_path}")
            return None
        return str(mesh_path)

    def _validate_lattice(self) -> Optional[Lattice]:
        section = self._mapping('lattice')
        if section is None:
            return None
        counts = self._vector(self._get(section, 'counts', 'lattice.counts', [1, 1, 1]), 'lattice.counts',
                              integer=True, positive=True)
        pitches = self._vector(self._get(section, 'pitches', 'lattice.pitches', [1.0, 1.0, 1.0]),
                               'lattice.pitches')
        if counts is None or pitches is None:
            return None
        try:
            return Lattice(counts=counts, pitches=pitches)
        except FmpbemError as e:
            self._error('lattice', str(e))
            return None

    def _validate_half_space(self) -> Tuple[bool, Optional[HalfSpace]]:
        if self.data.get('half_space') is None:
            self.defaults_applied.append('half_space')
            return True, None
        section = self._mapping('half_space')
        if section is None:
            return False, None
        axis = self._get(section, 'axis', 'half_space.axis', 2)
        if axis not in (0, 1, 2, 'x', 'y', 'z'):
            self._error('half_space.axis', f"must be 0, 1, 2 or x, y, z, got {axis}")
            return False, None
        axis = {'x': 0, 'y': 1, 'z': 2}.get(axis, axis)
        offset = self._number(self._get(section, 'offset', 'half_space.offset', 0.0), 'half_space.offset')
        reflection = self._complex(self._get(section, 'reflection', 'half_space.reflection', 1.0),
                                   'half_space.reflection')
        if offset is None or reflection is None:
            return False, None
        return True, HalfSpace(axis=axis, offset=offset, reflection=reflection)

    def _validate_sources(self) -> Optional[List]:
        sources = self.data.get('sources')
        if not isinstance(sources, list) or not sources:
            self._error('sources', "must be a non-empty list")
            return None
        result = []
        for i, entry in enumerate(sources):
            path = f"sources[{i}]"
            if not isinstance(entry, dict):
                self._error(path, "must be a mapping")
                continue
            kind = entry.get('type')
            if kind == 'plane_wave':
                direction = self._vector(entry.get('direction', [1.0, 0.0, 0.0]), f"{path}.direction")
                amplitude = self._complex(entry.get('amplitude', 1.0), f"{path}.amplitude")
                if direction is None or amplitude is None:
                    continue
                norm = float(np.linalg.norm(direction))
                if norm == 0.0:
                    self._error(f"{path}.direction", "must be nonzero")
                    continue
                result.append(PlaneWave(tuple(d / norm for d in direction), amplitude))
            elif kind == 'monopole':
                position = self._vector(entry.get('position'), f"{path}.position")
                strength = self._complex(entry.get('strength', 1.0), f"{path}.strength")
                if entry.get('position') is None:
                    self._error(f"{path}.position", "missing required key")
                if position is None or strength is None:
                    continue
                result.append(Monopole(position, strength))
            else:
                self._error(f"{path}.type", f"unknown source type '{kind}', expected plane_wave or monopole")
        return result if len(result) == len(sources) else None

    def _validate_sweep(self) -> Optional[Sweep]:
        section = self._mapping('sweep', required=True)
        if section is None:
            return None
        f_min = self._number(self._get(section, 'f_min', 'sweep.f_min', required=True), 'sweep.f_min',
                             positive=True)
        count = self._number(self._get(section, 'count', 'sweep.count', 1), 'sweep.count', minimum=1,
                             integer=True)
        f_max = self._number(self._get(section, 'f_max', 'sweep.f_max', f_min), 'sweep.f_max', positive=True)
        spacing = self._get(section, 'spacing', 'sweep.spacing', 'linear')
        if spacing not in ('linear', 'log'):
            self._error('sweep.spacing', f"must be linear or log, got {spacing}")
            return None
        if None in (f_min, f_max, count):
            return None
        if f_max < f_min:
            self._error('sweep.f_max', f"must be >= f_min ({f_min}), got {f_max}")
            return None
        return Sweep(f_min=f_min, f_max=f_max, count=count, spacing=spacing)

    def _validate_method(self) -> Optional[Method]:
        value = self.data.get('method')
        if value is None:
            self._error('method', "missing required key")
            return None
        try:
            return Method(value)
        except ValueError:
            valid = ", ".join(m.value for m in Method)
            self._error('method', f"unknown method '{value}', expected one of: {valid}")
            return None

    def _validate_fmm(self) -> Optional[FmmConfig]:
        section = self._mapping('fmm')
        if section is None:
            return None
        default = self.defaults.get_fmm_config().n_t if self.defaults else FmmConfig().n_t
        n_t = self._number(self._get(section, 'n_t', 'fmm.n_t', default), 'fmm.n_t', minimum=0, integer=True)
        if n_t is None:
            return None
        try:
            return FmmConfig(n_t=n_t)
        except FmpbemError as e:
            self._error('fmm.n_t', str(e))
            return None

    def _validate_solver(self) -> Optional[SolverSettings]:
        section = self._mapping('solver')
        if section is None:
            return None
        base = SolverSettings()
        if self.defaults:
            base = SolverSettings(**self.defaults.get_solver_config())
        tol = self._number(self._get(section, 'tol', 'solver.tol', base.tol), 'solver.tol', positive=True)
        restart = self._number(self._get(section, 'restart', 'solver.restart', base.restart), 'solver.restart',
                               minimum=1, integer=True)
        max_iter = self._number(self._get(section, 'max_iter', 'solver.max_iter', base.max_iter),
                                'solver.max_iter', minimum=1, integer=True)
        if None in (tol, restart, max_iter):
            return None
        return SolverSettings(tol=tol, restart=restart, max_iter=max_iter)

    def _validate_grid(self, section: Any, path: str) -> Optional[GridSpec]:
        if not isinstance(section, dict):
            self._error(path, "must be a mapping")
            return None
        origin = self._vector(self._get(section, 'origin', f"{path}.origin", required=True), f"{path}.origin")
        edge_u = self._vector(self._get(section, 'edge_u', f"{path}.edge_u", required=True), f"{path}.edge_u")
        edge_v = self._vector(self._get(section, 'edge_v', f"{path}.edge_v", required=True), f"{path}.edge_v")
        counts = self._vector(self._get(section, 'counts', f"{path}.counts", [40, 80]), f"{path}.counts",
                              length=2, integer=True, positive=True)
        if None in (origin, edge_u, edge_v, counts):
            return None
        return GridSpec(origin=origin, edge_u=edge_u, edge_v=edge_v, counts=counts)

    def _validate_outputs(self, name: str) -> Optional[Outputs]:
        section = self._mapping('outputs', required=True)
        if section is None:
            return None
        directory = self._get(section, 'directory', 'outputs.directory', f"results/{name}")
        if not isinstance(directory, str):
            self._error('outputs.directory', "must be a string")
            return None
        if section.get('il_grid') is None:
            self._error('outputs.il_grid', "missing required key")
            return None
        il_grid = self._validate_grid(section['il_grid'], 'outputs.il_grid')
        field_plane = None
        if section.get('field_plane') is not None:
            field_plane = self._validate_grid(section['field_plane'], 'outputs.field_plane')
            if field_plane is None:
                return None
        if il_grid is None:
            return None
        return Outputs(directory=os.path.expanduser(directory), il_grid=il_grid, field_plane=field_plane)

    # ------------------------------------------------------------------

    def validate(self) -> bool:
        """
        Validate the scene file and resolve it.

        Returns:
            bool: True if valid, False otherwise
        """
        self.errors = []
        self.defaults_applied = []
        self.scene = None

        try:
            self.data = self._load_yaml()
        except ValidationError as e:
            self.errors.append(str(e))
            return False

        if not isinstance(self.data, dict):
            self.errors.append("YAML root must be a dictionary")
            return False

        for key in sorted(set(self.data) - set(self.SECTIONS)):
            self._error(key, "unknown section")

        name = self.data.get('name')
        if name is None:
            name = Path(self.yaml_file_path).stem if self.yaml_file_path else "scene"
            self.defaults_applied.append('name')
        name = str(name)

        medium = self._validate_medium()
        geometry = self._validate_geometry()
        lattice = self._validate_lattice()
        half_space_ok, half_space = self._validate_half_space()
        sources = self._validate_sources()
        sweep = self._validate_sweep()
        method = self._validate_method()
        fmm = self._validate_fmm()
        solver = self._validate_solver()
        outputs = self._validate_outputs(name)

        if self.errors or None in (medium, geometry, lattice, sources, sweep, method, fmm, solver, outputs) \
                or not half_space_ok:
            if not self.errors:
                self.errors.append("Scene could not be resolved")
            return False

        self.scene = Scene(name=name, medium=medium, geometry=geometry, lattice=lattice, half_space=half_space,
                           field=IncidentField(sources=tuple(sources), half_space=half_space), sweep=sweep,
                           method=method, fmm=fmm, solver=solver, outputs=outputs,
                           defaults_applied=tuple(self.defaults_applied))
        return True

    def is_valid(self) -> bool:
        return self.scene is not None and not self.errors

    def get_errors(self) -> List[str]:
        return self.errors.copy()

    def get_scene(self) -> Scene:
        """The resolved scene; raises ValidationError listing every problem otherwise"""
        if self.scene is None:
            raise ValidationError("Invalid scene file:\n  " + "\n  ".join(self.errors), self.errors)
        return self.scene

    def get_method(self) -> Optional[str]:
        return self.scene.method.value if self.scene else None

    def get_frequencies(self) -> np.ndarray:
        return self.get_scene().sweep.frequencies()

    def load_from_file(self, yaml_file_path: str) -> bool:
        """Load and validate from a new file"""
        self.yaml_file_path = yaml_file_path
        self.yaml_content = None
        return self.validate()

    def load_from_string(self, yaml_content: str) -> bool:
        """Load and validate from a YAML string"""
        self.yaml_content = yaml_content
        self.yaml_file_path = None
        return self.validate()


def load_scene(path: Union[str, Path], defaults=None) -> Scene:
    return YAMLSceneValidator(str(path), defaults=defaults).get_scene()
