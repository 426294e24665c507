"""
SceneRunner class
Runs the frequency sweep of a scene file and writes its CSV outputs
"""
import csv
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import yaml

from fmpbem.numerics.assembly import (assemble_dense, assemble_rhs, check_half_space, periodic_operator,
                                      storage_bytes)
from fmpbem.numerics.errors import FmpbemError, MemoryCapError
from fmpbem.numerics.fmm import assemble_periodic_fmm
from fmpbem.numerics.geometry import Lattice, SurfaceMesh, replicate_lattice
from fmpbem.numerics.kernels import QuadratureSettings, WaveContext, incident_values
from fmpbem.numerics.postproc import evaluate_field, insertion_loss
from fmpbem.numerics.solver import gmres
from fmpbem.runner.fmpbem_tools.yaml_scene_validator import Method, Scene, YAMLSceneValidator
from fmpbem.runner.fmpbem_tools.yaml_solver_config_reader import SolverConfigReader

IL_COLUMNS = ("frequency_hz", "il_db", "iterations", "residual", "wall_time_s", "converged")
FIELD_COLUMNS = ("x", "y", "z", "re_p", "im_p", "abs_p")
BENCHMARK_COLUMNS = ("method", "size", "assembly_s", "matvec_s", "memory_bytes")
FIT_COLUMNS = ("method", "points", "assembly_exponent", "matvec_exponent", "memory_exponent")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

# observation points evaluated per batch, times the number of surface elements
_FIELD_BATCH = 4_000_000


def _fmt(value) -> str:
    return "%.17g" % value


def fit_scaling_exponent(sizes: Sequence[float], values: Sequence[float]) -> float:
    """
    Slope of the least-squares line through (log size, log value).

    Non-finite or non-positive values (skipped backends) are left out; fewer
    than two distinct sizes give nan.
    """
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values) & (values > 0) & (sizes > 0)
    if np.unique(sizes[keep]).size < 2:
        return float("nan")
    return float(np.polyfit(np.log(sizes[keep]), np.log(values[keep]), 1)[0])


@dataclass
class FrequencyResult:
    frequency: float
    il_db: float = float("nan")
    iterations: int = 0
    residual: float = float("nan")
    wall_time: float = 0.0
    converged: bool = False
    field_points: Optional[np.ndarray] = None
    field_values: Optional[np.ndarray] = None
    error: Optional[str] = None


@dataclass
class SweepResult:
    scene: Scene
    results: List[FrequencyResult] = field(default_factory=list)
    output_dir: Optional[Path] = None

    @property
    def failed(self) -> List[FrequencyResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def unconverged(self) -> List[FrequencyResult]:
        return [r for r in self.results if r.error is None and not r.converged]

    @property
    def exit_status(self) -> int:
        return EXIT_NUMERICAL if self.failed else EXIT_OK


class SceneRunner:
    def __init__(self, logger=None, config: Optional[SolverConfigReader] = None, threads: Optional[int] = None,
                 workers: Optional[int] = None):
        """
        Initializes a SceneRunner.

        Args:
            logger (SystemLogger): The system logger instance, or None for silence.
            config (SolverConfigReader): Solver configuration; the packaged defaults when None.
            threads (int): Frequencies solved concurrently; the configured value when None.
            workers (int): FFT workers per transform, passed to scipy.fft.
        """
        self.logger = logger
        self.config = config if config is not None else SolverConfigReader()
        self.threads = max(1, int(threads if threads is not None else self.config.get_threads()))
        self.workers = workers
        self.settings: QuadratureSettings = self.config.get_quadrature_settings()
        self.memory_cap = self.config.get_memory_cap()

    # ------------------------------------------------------------------
    # Logging helpers
    # ------------------------------------------------------------------

    def _log_info(self, message: str, component: str = "scene_runner", metadata: Optional[dict] = None):
        if self.logger is not None:
            self.logger.log_info(message, component, metadata)

    def _log_debug(self, message: str, component: str = "scene_runner", metadata: Optional[dict] = None):
        if self.logger is not None:
            self.logger.log_debug(message, component, metadata)

    def _log_warning(self, message: str, component: str = "scene_runner", metadata: Optional[dict] = None):
        if self.logger is not None:
            self.logger.log_warning(message, component, metadata)

    def _log_error(self, message: str, component: str = "scene_runner", exception: Optional[Exception] = None,
                   metadata: Optional[dict] = None):
        if self.logger is not None:
            self.logger.log_error(message, component, exception, metadata)

    @contextmanager
    def _timed(self, operation: str, metadata: Optional[dict] = None):
        if self.logger is None:
            yield {}
        else:
            with self.logger.timed("scene_runner", operation, metadata) as extra:
                yield extra

    # ------------------------------------------------------------------
    # Scene files
    # ------------------------------------------------------------------

    def validate_scene_file(self, file_path: str) -> Optional[Scene]:
        """
        Validate a scene file.

        Returns:
            Scene: the resolved scene, or None after logging every problem found
        """
        path = Path(file_path)
        self._log_info(f"Validating scene file: {path}", metadata={"path": str(path)})
        if not path.is_file():
            self._log_error(f"Scene file '{file_path}' does not exist or is not a file")
            return None
        validator = YAMLSceneValidator(str(path), defaults=self.config)
        if not validator.is_valid():
            self._log_error("Scene file validation failed", metadata={"errors": validator.get_errors()})
            return None
        scene = validator.get_scene()
        self._log_info("Scene file validation successful",
                       metadata={"name": scene.name, "method": scene.method.value,
                                 "defaults_applied": list(scene.defaults_applied)})
        return scene

    # ------------------------------------------------------------------
    # One frequency
    # ------------------------------------------------------------------

    def build_operator(self, scene: Scene, cell: SurfaceMesh, ctx: WaveContext, lattice: Optional[Lattice] = None):
        """
        Assembled operator of the scene's backend: the dense matrix, a
        StructuredOperator (pbem) or FmmOperators (fmpbem).
        """
        lattice = lattice or scene.lattice
        if scene.method is Method.DENSE:
            mesh = replicate_lattice(cell, lattice)
            return assemble_dense(mesh, ctx, half_space=scene.half_space, settings=self.settings,
                                  memory_cap=self.memory_cap, logger=self.logger).A
        if scene.method is Method.PBEM:
            return periodic_operator(cell, lattice, ctx, scene.half_space, self.settings, workers=self.workers,
                                     logger=self.logger)
        return assemble_periodic_fmm(cell, lattice, ctx, scene.fmm, scene.half_space, self.settings,
                                     workers=self.workers, logger=self.logger)

    @staticmethod
    def _linear(operator):
        return operator if isinstance(operator, np.ndarray) else operator.as_linear_operator()

    def _total_field(self, mesh: SurfaceMesh, p: np.ndarray, ctx: WaveContext, scene: Scene,
                     points: np.ndarray) -> np.ndarray:
        batch = max(1, _FIELD_BATCH // max(1, mesh.n_elements))
        parts = [evaluate_field(mesh, p, ctx, scene.field, points[i:i + batch], scene.half_space, self.settings,
                                logger=self.logger)
                 for i in range(0, points.shape[0], batch)]
        return np.concatenate(parts)

    def solve_frequency(self, scene: Scene, cell: SurfaceMesh, frequency: float) -> FrequencyResult:
        """Assemble, solve and post-process one frequency of the sweep"""
        result = FrequencyResult(frequency=float(frequency))
        started = time.perf_counter()
        meta = {"frequency_hz": float(frequency), "method": scene.method.value}
        self._log_debug(f"Solving {frequency:g} Hz", metadata=meta)
        try:
            ctx = WaveContext(frequency=frequency, c=scene.medium.c, rho=scene.medium.rho)
            mesh = replicate_lattice(cell, scene.lattice)

            with self._timed("assembly", meta) as stage:
                operator = self.build_operator(scene, cell, ctx)
                rhs = assemble_rhs(mesh, ctx, scene.field)
                stage.update(n_dof=mesh.n_elements, memory_bytes=storage_bytes(operator))

            with self._timed("solve", meta) as stage:
                report = gmres(self._linear(operator), rhs, tol=scene.solver.tol, restart=scene.solver.restart,
                               max_iter=scene.solver.max_iter, logger=self.logger)
                stage["iterations"] = report.iterations

            with self._timed("postprocess", meta):
                grid = scene.outputs.il_grid.build("il_grid")
                p_total = self._total_field(mesh, report.solution, ctx, scene, grid.points)
                p_inc, _ = incident_values(scene.field, ctx, grid.points, np.zeros_like(grid.points))
                result.il_db = insertion_loss(p_inc, p_total)
                if scene.outputs.field_plane is not None:
                    plane = scene.outputs.field_plane.build("field_plane")
                    result.field_points = plane.points
                    result.field_values = self._total_field(mesh, report.solution, ctx, scene, plane.points)

            result.iterations = report.iterations
            result.residual = report.relative_residual
            result.converged = report.converged
            if not report.converged:
                self._log_warning(f"GMRES did not converge at {frequency:g} Hz; row flagged",
                                  metadata={**meta, "residual": report.relative_residual})
        except FmpbemError as e:
            result.error = f"{type(e).__name__}: {e}"
            self._log_error(f"Numerical failure at {frequency:g} Hz", exception=e, metadata=meta)
        result.wall_time = time.perf_counter() - started
        return result

    # ------------------------------------------------------------------
    # Sweeps
    # ------------------------------------------------------------------

    def run_scene(self, scene: Scene, output_dir: Optional[str] = None) -> SweepResult:
        """
        Run every frequency of the sweep and write il.csv, the optional
        field_<f>.csv files and manifest.yaml into the output directory.
        """
        out = Path(output_dir or scene.outputs.directory)
        out.mkdir(parents=True, exist_ok=True)
        if output_dir:
            scene = scene.with_output(str(out))
        frequencies = scene.sweep.frequencies()
        if self.logger is not None:
            self.logger.log_sweep_start(scene.name, {"method": scene.method.value, "threads": self.threads,
                                                     "frequencies": len(frequencies), "output": str(out)})

        started = time.perf_counter()
        cell = scene.geometry.build_cell()
        scene.lattice.check_cell(cell)
        if scene.half_space is not None:
            check_half_space(cell, scene.lattice, scene.half_space)
        if self.threads == 1 or len(frequencies) == 1:
            results = [self.solve_frequency(scene, cell, f) for f in frequencies]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                # map keeps frequency order whatever the completion order
                results = list(pool.map(lambda f: self.solve_frequency(scene, cell, f), frequencies))

        sweep = SweepResult(scene=scene, results=results, output_dir=out)
        self.write_il_csv(out / "il.csv", results)
        for result in results:
            if result.field_values is not None:
                self.write_field_csv(out / f"field_{result.frequency:g}.csv", result.field_points,
                                     result.field_values)
        self.write_manifest(out / "manifest.yaml", scene, cell, frequencies)
        if self.logger is not None:
            self.logger.log_sweep_stop(scene.name, {"wall_time_s": time.perf_counter() - started,
                                                    "failed": len(sweep.failed),
                                                    "unconverged": len(sweep.unconverged)})
        return sweep

    @staticmethod
    def write_il_csv(path: Path, results: Sequence[FrequencyResult]) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(IL_COLUMNS)
            for r in results:
                writer.writerow([_fmt(r.frequency), _fmt(r.il_db), r.iterations, _fmt(r.residual),
                                 _fmt(r.wall_time), int(r.converged)])

    @staticmethod
    def write_field_csv(path: Path, points: np.ndarray, values: np.ndarray) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(FIELD_COLUMNS)
            for point, value in zip(points, values):
                writer.writerow([_fmt(point[0]), _fmt(point[1]), _fmt(point[2]), _fmt(value.real),
                                 _fmt(value.imag), _fmt(abs(value))])

    def write_manifest(self, path: Path, scene: Scene, cell: SurfaceMesh, frequencies: np.ndarray,
                       benchmark: Optional[Dict] = None) -> None:
        """Every resolved parameter of the run, defaults included"""
        manifest = {
            'scene': scene.to_dict(),
            'resolved': {
                'frequencies_hz': [float(f) for f in frequencies],
                'cell_elements': int(cell.n_elements),
                'total_elements': int(cell.n_elements * scene.lattice.n_cells),
            },
            'assembly': {
                'memory_cap_bytes': int(self.memory_cap),
                'quadrature_order': self.settings.order,
                'self_quadrature_order': self.settings.self_order,
                'near_threshold': self.settings.near_threshold,
                'max_subdivision': self.settings.max_subdivision,
            },
            'runner': {'threads': self.threads, 'fft_workers': self.workers},
        }
        if benchmark is not None:
            manifest['benchmark'] = benchmark
        if self.logger is not None:
            manifest['timings_ms'] = self.logger.get_timings()
        with open(path, "w") as handle:
            yaml.safe_dump(manifest, handle, sort_keys=False)

    # ------------------------------------------------------------------
    # Benchmark
    # ------------------------------------------------------------------

    def benchmark(self, scene: Scene, axis: int, sizes: Sequence[int],
                  methods: Sequence[Method] = (Method.DENSE, Method.PBEM, Method.FMPBEM),
                  output_dir: Optional[str] = None, repeats: int = 3) -> Path:
        """
        Time assembly and one matrix-vector product while one lattice count
        varies, at the sweep's lowest frequency. Writes benchmark_<axis>.csv, the
        log-log scaling exponents per backend in benchmark_<axis>_fit.csv and
        a manifest.yaml with the exponents under `benchmark`.
        """
        if axis not in (0, 1, 2):
            raise ValueError(f"Benchmark axis must be 0, 1 or 2, got {axis}")
        out = Path(output_dir or scene.outputs.directory)
        out.mkdir(parents=True, exist_ok=True)
        cell = scene.geometry.build_cell()
        ctx = WaveContext(frequency=scene.sweep.f_min, c=scene.medium.c, rho=scene.medium.rho)
        rng = np.random.default_rng(0)
        rows: List[Dict] = []

        for size in sizes:
            counts = list(scene.lattice.counts)
            counts[axis] = int(size)
            lattice = Lattice(counts=tuple(counts), pitches=scene.lattice.pitches)
            n = cell.n_elements * lattice.n_cells
            p = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            for method in methods:
                variant = scene.with_method(method)
                row = {"method": method.value, "size": int(size)}
                try:
                    started = time.perf_counter()
                    operator = self.build_operator(variant, cell, ctx, lattice)
                    row["assembly_s"] = time.perf_counter() - started
                    matvec = self._linear(operator).dot
                    timings = []
                    for _ in range(repeats):
                        started = time.perf_counter()
                        matvec(p)
                        timings.append(time.perf_counter() - started)
                    row["matvec_s"] = float(np.median(timings))
                    row["memory_bytes"] = storage_bytes(operator)
                except MemoryCapError as e:
                    self._log_warning(f"Skipping {method.value} at size {size}: {e}")
                    row.update(assembly_s=float("nan"), matvec_s=float("nan"), memory_bytes=-1)
                self._log_info(f"Benchmark {method.value} size {size}", metadata=row)
                rows.append(row)

        path = out / f"benchmark_{'xyz'[axis]}.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(BENCHMARK_COLUMNS)
            for row in rows:
                writer.writerow([row["method"], row["size"], _fmt(row["assembly_s"]), _fmt(row["matvec_s"]),
                                 row["memory_bytes"]])

        exponents = self.fit_benchmark(rows)
        with open(out / f"benchmark_{'xyz'[axis]}_fit.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(FIT_COLUMNS)
            for method, fit in exponents.items():
                writer.writerow([method, fit["points"], _fmt(fit["assembly"]), _fmt(fit["matvec"]),
                                 _fmt(fit["memory"])])
        self._log_info(f"Benchmark exponents along {'xyz'[axis]}", metadata=exponents)
        self.write_manifest(out / "manifest.yaml", scene, cell, np.array([scene.sweep.f_min]),
                            benchmark={'axis': 'xyz'[axis], 'sizes': [int(s) for s in sizes],
                                       'repeats': int(repeats), 'exponents': exponents})
        return path

    @staticmethod
    def fit_benchmark(rows: Sequence[Dict]) -> Dict[str, Dict]:
        """Fitted exponents of assembly time, matvec time and stored bytes against the size, per method"""
        exponents = {}
        for method in dict.fromkeys(row["method"] for row in rows):
            own = [row for row in rows if row["method"] == method]
            sizes = [row["size"] for row in own]
            memory = [row["memory_bytes"] if row["memory_bytes"] > 0 else float("nan") for row in own]
            exponents[method] = {
                'points': sum(1 for row in own if np.isfinite(row["matvec_s"])),
                'assembly': fit_scaling_exponent(sizes, [row["assembly_s"] for row in own]),
                'matvec': fit_scaling_exponent(sizes, [row["matvec_s"] for row in own]),
                'memory': fit_scaling_exponent(sizes, memory),
            }
        return exponents
