from pathlib import Path

import numpy as np
import pytest
import yaml
from numpy.testing import assert_allclose

from fmpbem.numerics.geometry import generate_sphere_mesh, write_mesh
from fmpbem.runner.fmpbem_tools.yaml_scene_validator import (GeometryType, Method, ValidationError,
                                                             YAMLSceneValidator, load_scene)
from fmpbem.runner.fmpbem_tools.yaml_solver_config_reader import SolverConfigReader

SCENES_DIR = Path(__file__).parent.parent / "fmpbem" / "runner" / "etc" / "scenes"

MINIMAL = """\
geometry:
  type: sphere
  radius: 0.1
  refinement: 2
lattice:
  counts: [2, 1, 1]
  pitches: [0.35, 0.35, 0.35]
sources:
  - type: plane_wave
sweep:
  f_min: 200.0
  f_max: 400.0
  count: 3
method: pbem
outputs:
  il_grid:
    origin: [1.0, 0.0, 0.0]
    edge_u: [1.0, 0.0, 0.0]
    edge_v: [0.0, 1.0, 0.0]
    counts: [2, 2]
"""


def scene_text(**changes):
    data = yaml.safe_load(MINIMAL)
    for key, value in changes.items():
        if value is None:
            data.pop(key, None)
        else:
            data[key] = value
    return yaml.safe_dump(data, sort_keys=False)


class TestPackagedScenes:
    @pytest.mark.parametrize("name", ["sphere_array", "wall_barrier", "cylinder_barrier", "cshape_barrier"])
    def test_templates_are_valid(self, name):
        validator = YAMLSceneValidator(str(SCENES_DIR / f"{name}.yaml"))
        assert validator.is_valid(), validator.get_errors()
        scene = validator.get_scene()
        assert scene.name == name
        scene.lattice.check_cell(scene.geometry.build_cell())

    def test_sphere_array_template(self):
        scene = load_scene(SCENES_DIR / "sphere_array.yaml")
        assert scene.method is Method.FMPBEM
        assert scene.geometry.type is GeometryType.SPHERE
        assert scene.lattice.counts == (5, 5, 1)
        assert scene.half_space is None
        assert_allclose(scene.sweep.frequencies(), [500.0])
        assert scene.outputs.field_plane is not None


class TestResolution:
    def test_minimal_scene_defaults(self):
        validator = YAMLSceneValidator(yaml_content=MINIMAL)
        assert validator.is_valid(), validator.get_errors()
        scene = validator.get_scene()
        assert scene.name == "scene"
        assert scene.medium.c == 343.0
        assert scene.fmm.n_t == 4
        assert scene.solver.tol == 1e-4
        assert scene.outputs.directory == "results/scene"
        assert_allclose(validator.get_frequencies(), [200.0, 300.0, 400.0])
        assert validator.get_method() == "pbem"
        for path in ("name", "medium", "half_space", "fmm", "solver", "geometry.center", "geometry.beta"):
            assert any(applied.startswith(path) for applied in scene.defaults_applied), path

    def test_defaults_from_solver_configuration(self, tmp_path):
        config_path = tmp_path / "solverConfig.yaml"
        config_path.write_text("solver:\n  tol: 1.0e-6\nfmm:\n  n_t: 6\n")
        scene = YAMLSceneValidator(yaml_content=MINIMAL, defaults=SolverConfigReader(config_path)).get_scene()
        assert scene.solver.tol == 1e-6
        assert scene.fmm.n_t == 6

    def test_single_frequency_sweep(self):
        scene = YAMLSceneValidator(yaml_content=scene_text(sweep={"f_min": 250.0, "count": 1})).get_scene()
        assert_allclose(scene.sweep.frequencies(), [250.0])

    def test_log_spacing(self):
        sweep = {"f_min": 100.0, "f_max": 1000.0, "count": 3, "spacing": "log"}
        scene = YAMLSceneValidator(yaml_content=scene_text(sweep=sweep)).get_scene()
        assert_allclose(scene.sweep.frequencies(), [100.0, np.sqrt(1e5), 1000.0])

    def test_half_space_axis_letter(self):
        text = scene_text(half_space={"axis": "z", "offset": -0.2, "reflection": [0.9, 0.1]},
                          lattice={"counts": [2, 1, 1], "pitches": [0.35, 0.35, 0.35]})
        scene = YAMLSceneValidator(yaml_content=text).get_scene()
        assert scene.half_space.axis == 2
        assert scene.half_space.reflection == pytest.approx(0.9 + 0.1j)
        assert scene.field.half_space == scene.half_space

    def test_monopole_source(self):
        sources = [{"type": "monopole", "position": [-1.0, 0.0, 0.5], "strength": 2.0}]
        scene = YAMLSceneValidator(yaml_content=scene_text(sources=sources)).get_scene()
        assert scene.field.sources[0].strength == 2.0

    def test_mesh_path_relative_to_scene_file(self, tmp_path):
        write_mesh(generate_sphere_mesh(0.1, 2), tmp_path / "cell.msh")
        path = tmp_path / "scene.yaml"
        path.write_text(scene_text(geometry={"type": "mesh", "path": "cell.msh", "beta": [0.0, 0.5]}))
        scene = load_scene(path)
        assert scene.name == "scene"
        cell = scene.geometry.build_cell()
        assert cell.n_elements == 24
        assert_allclose(cell.beta, 0.5j)

    def test_with_method_and_output(self):
        scene = YAMLSceneValidator(yaml_content=MINIMAL).get_scene()
        assert scene.with_method("dense").method is Method.DENSE
        assert scene.with_output("/tmp/run").outputs.directory == "/tmp/run"
        assert scene.method is Method.PBEM

    def test_to_dict_is_plain_yaml(self):
        scene = YAMLSceneValidator(yaml_content=MINIMAL).get_scene()
        data = yaml.safe_load(yaml.safe_dump(scene.to_dict()))
        assert data["method"] == "pbem"
        assert data["lattice"]["counts"] == [2, 1, 1]
        assert data["sources"][0]["direction"] == [1.0, 0.0, 0.0]
        assert data["half_space"] is None
        assert "fmm" in data["defaults_applied"] or "fmm.n_t" in data["defaults_applied"]


class TestErrors:
    @staticmethod
    def errors(text):
        validator = YAMLSceneValidator(yaml_content=text)
        assert not validator.is_valid()
        return validator.get_errors()

    def test_unknown_method(self):
        errors = self.errors(scene_text(method="multigrid"))
        assert any("unknown method 'multigrid'" in e and "dense, pbem, fmpbem" in e for e in errors)

    def test_unknown_section_reports_its_line(self):
        errors = self.errors(MINIMAL + "extras:\n  colour: red\n")
        line = len(MINIMAL.splitlines()) + 1
        assert f"extras (line {line}): unknown section" in errors

    def test_line_numbers_point_at_the_key(self):
        text = MINIMAL.replace("radius: 0.1", "radius: -0.1")
        errors = self.errors(text)
        assert any(e.startswith("geometry.radius (line 3): must be positive") for e in errors)

    def test_missing_sources(self):
        assert any(e.startswith("sources") for e in self.errors(scene_text(sources=None)))

    def test_unknown_geometry_key(self):
        errors = self.errors(scene_text(geometry={"type": "sphere", "radius": 0.1, "height": 1.0}))
        assert any("unknown key for geometry type 'sphere'" in e for e in errors)

    def test_sweep_bounds(self):
        errors = self.errors(scene_text(sweep={"f_min": 400.0, "f_max": 200.0, "count": 2}))
        assert any(e.startswith("sweep.f_max") for e in errors)

    def test_bad_half_space_axis(self):
        assert any(e.startswith("half_space.axis") for e in self.errors(scene_text(half_space={"axis": "w"})))

    def test_missing_mesh_file(self, tmp_path):
        errors = self.errors(scene_text(geometry={"type": "mesh", "path": str(tmp_path / "absent.msh")}))
        assert any("mesh file not found" in e for e in errors)

    def test_every_problem_is_reported(self):
        text = scene_text(method="fast", sweep={"f_min": -1.0}, medium={"c": "fast"})
        errors = self.errors(text)
        assert len(errors) >= 3

    def test_get_scene_raises(self):
        validator = YAMLSceneValidator(yaml_content=scene_text(method=None))
        with pytest.raises(ValidationError) as info:
            validator.get_scene()
        assert info.value.errors == validator.get_errors()

    def test_invalid_yaml_and_root(self, tmp_path):
        assert "Invalid YAML format" in self.errors("geometry: [1, 2\n")[0]
        assert self.errors("- 1\n") == ["YAML root must be a dictionary"]
        validator = YAMLSceneValidator(str(tmp_path / "absent.yaml"))
        assert validator.get_errors()[0].startswith("File not found")

    def test_reload_from_string(self):
        validator = YAMLSceneValidator(yaml_content=scene_text(method="fast"))
        assert not validator.is_valid()
        assert validator.load_from_string(MINIMAL)
        assert validator.get_errors() == []
