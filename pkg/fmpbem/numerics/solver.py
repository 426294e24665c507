"""
Restarted GMRES over matrix-free operators.
"""
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator
from scipy.sparse.linalg import gmres as scipy_gmres

from fmpbem.numerics.errors import DimensionError, DomainError, NumericalError

Operator = Union[Callable[[np.ndarray], np.ndarray], LinearOperator, np.ndarray]


@dataclass
class SolveReport:
    solution: np.ndarray
    residual_history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    relative_residual: float = float("nan")


def _checked(apply: Operator, size: int) -> LinearOperator:
    if isinstance(apply, np.ndarray):
        matrix = apply
        apply = lambda v: matrix @ v  # noqa: E731
    elif isinstance(apply, LinearOperator):
        apply = apply.matvec

    def matvec(v):
        result = np.asarray(apply(np.asarray(v).reshape(-1)))
        if result.shape != (size,):
            raise DimensionError(f"Operator returned shape {result.shape}, expected ({size},)")
        if not np.all(np.isfinite(result)):
            raise NumericalError("Operator produced NaN or Inf values")
        return result

    return LinearOperator((size, size), matvec=matvec, dtype=complex)


def gmres(apply: Operator, b: np.ndarray, tol: float = 1e-4, restart: int = 100, max_iter: int = 1000,
          x0: Optional[np.ndarray] = None, preconditioner: Optional[Operator] = None,
          logger=None) -> SolveReport:
    """
    Solve A p = b to relative residual `tol`.

    Non-convergence within max_iter inner iterations is reported through
    `converged`, not raised. The converged flag is checked against the true
    residual ||b - A p|| / ||b||.
    """
    if tol <= 0 or restart < 1 or max_iter < 1:
        raise DomainError("GMRES needs tol > 0, restart >= 1 and max_iter >= 1")
    b = np.asarray(b, dtype=complex).reshape(-1)
    size = b.shape[0]
    operator = _checked(apply, size)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return SolveReport(solution=np.zeros(size, dtype=complex), iterations=0, converged=True,
                           relative_residual=0.0)

    history: List[float] = []
    restart = min(restart, size)
    precond = _checked(preconditioner, size) if preconditioner is not None else None
    started = time.perf_counter()
    solution = x0
    # one restart cycle per call; the last cycle is shortened to the remaining budget
    while len(history) < max_iter:
        done = len(history)
        solution, info = scipy_gmres(operator, b, x0=solution, rtol=tol, atol=0.0,
                                     restart=min(restart, max_iter - done), maxiter=1, M=precond,
                                     callback=history.append, callback_type="pr_norm")
        if info < 0:
            raise NumericalError(f"GMRES breakdown (info={info})")
        if info == 0 or len(history) == done:
            break
    residual = float(np.linalg.norm(b - operator.matvec(solution)) / b_norm)
    # small slack for the difference between the recurrence and the true residual
    converged = bool(residual <= tol * (1.0 + 1e-6))
    report = SolveReport(solution=solution, residual_history=[float(h) for h in history],
                         iterations=len(history), converged=converged, relative_residual=residual)
    if logger:
        logger.log_performance("solver", "gmres", (time.perf_counter() - started) * 1000.0,
                               {"n": size, "iterations": report.iterations, "residual": residual,
                                "converged": converged})
        if not converged:
            logger.log_warning(f"GMRES stopped at relative residual {residual:.3e} after "
                               f"{report.iterations} iterations", "solver", {"tol": tol})
    return report
