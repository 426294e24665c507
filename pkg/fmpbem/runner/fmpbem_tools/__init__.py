from . import yaml_solver_config_reader
from . import yaml_scene_validator

__all__ = ["yaml_solver_config_reader", "yaml_scene_validator"]
