"""
This module provides a class to read and manage the fmpbem solver
configuration from a YAML file.
"""
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from fmpbem.numerics.assembly import DEFAULT_MEMORY_CAP
from fmpbem.numerics.fmm import FmmConfig
from fmpbem.numerics.kernels import QuadratureSettings

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "etc" / "solverConfig.yaml"


class SolverConfigReader:
    """
    A class to read and manage solver configuration from a YAML file.

    Missing keys fall back to the library defaults, so an empty section is valid.
    """

    def __init__(self, config_file_path: Union[str, Path, None] = None):
        """
        Initialize the configuration reader with a YAML file path.

        Args:
            config_file_path (str): Path to the YAML configuration file.
                Defaults to the packaged etc/solverConfig.yaml.
        """
        self.config_file_path = str(config_file_path or DEFAULT_CONFIG_PATH)
        self.config_data: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self) -> None:
        """
        Load and parse the YAML configuration file.

        Raises:
            FileNotFoundError: If the configuration file doesn't exist
            yaml.YAMLError: If there's an error parsing the YAML file
        """
        try:
            with open(self.config_file_path, 'r') as file:
                self.config_data = yaml.safe_load(file) or {}
        except FileNotFoundError:
            raise FileNotFoundError(f"Configuration file not found: {self.config_file_path}")
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"Error parsing YAML file: {e}")
        if not isinstance(self.config_data, dict):
            raise yaml.YAMLError(f"Configuration root must be a mapping: {self.config_file_path}")

    def reload_config(self) -> None:
        """Reload the configuration from the file."""
        self._load_config()

    def _section(self, name: str) -> dict:
        return self.config_data.get(name) or {}

    # Logging
    def get_logs_enabled(self) -> bool:
        return bool(self._section('logging').get('logs_enabled', False))

    def get_logs_path(self) -> Optional[str]:
        """
        Get the expanded logs directory path.

        Environment variables and ~ are expanded; "NONE" and a missing key
        both mean no log file.
        """
        path = self._section('logging').get('logs_path')
        if not path or path == "NONE":
            return None
        return os.path.expanduser(os.path.expandvars(path))

    def get_logs_level(self) -> str:
        return str(self._section('logging').get('logs_level', 'INFO')).upper()

    def get_console_logs_enabled(self) -> bool:
        return bool(self._section('logging').get('logs_console_enabled', True))

    # Assembly
    def get_memory_cap(self) -> int:
        return int(self._section('assembly').get('memory_cap_bytes', DEFAULT_MEMORY_CAP))

    def get_quadrature_settings(self) -> QuadratureSettings:
        section = self._section('assembly')
        defaults = QuadratureSettings()
        return QuadratureSettings(
            order=int(section.get('quadrature_order', defaults.order)),
            self_order=int(section.get('self_quadrature_order', defaults.self_order)),
            near_threshold=float(section.get('near_threshold', defaults.near_threshold)),
            max_subdivision=int(section.get('max_subdivision', defaults.max_subdivision)),
        )

    # Solver
    def get_solver_tol(self) -> float:
        return float(self._section('solver').get('tol', 1e-4))

    def get_solver_restart(self) -> int:
        return int(self._section('solver').get('restart', 100))

    def get_solver_max_iter(self) -> int:
        return int(self._section('solver').get('max_iter', 1000))

    # FMM and runner
    def get_fmm_config(self) -> FmmConfig:
        return FmmConfig(n_t=int(self._section('fmm').get('n_t', FmmConfig().n_t)))

    def get_threads(self) -> int:
        return int(self._section('runner').get('threads', 1))

    def get_logging_config(self) -> dict:
        return self._section('logging')

    def get_solver_config(self) -> dict:
        """Solver section with every default filled in"""
        return {'tol': self.get_solver_tol(), 'restart': self.get_solver_restart(),
                'max_iter': self.get_solver_max_iter()}

    def get_all_config(self) -> dict:
        return self.config_data

    def __str__(self) -> str:
        return yaml.dump(self.config_data, default_flow_style=False)
