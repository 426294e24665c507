"""
    fmpbem/numerics/__init__.py

    Solver library: special functions, geometry, kernels, dense and structured
    assembly, the multipole operators, GMRES and post-processing.
"""
from . import errors
from . import specfun
from . import geometry
from . import kernels
from . import structured
from . import assembly
from . import solver
from . import postproc
from . import fmm
from . import scenes

__all__ = ["errors", "specfun", "geometry", "kernels", "structured", "assembly", "solver", "postproc", "fmm",
           "scenes"]
