"""
Exception hierarchy of the fmpbem numerical library.
"""


class FmpbemError(Exception):
    """Base class for all library errors"""
    pass


class DomainError(FmpbemError, ValueError):
    """Argument outside the domain of an operation"""
    pass


class SingularityError(DomainError):
    """Kernel evaluated at coincident points"""
    pass


class DimensionError(FmpbemError, ValueError):
    """Vector or block sizes do not match the operator"""
    pass


class MemoryCapError(FmpbemError, MemoryError):
    """Dense storage would exceed the configured memory cap"""
    pass


class ConfigurationError(FmpbemError):
    """Invalid lattice, mirror plane or operator configuration"""
    pass


class NumericalError(FmpbemError, ArithmeticError):
    """An operator produced NaN or Inf values"""
    pass


class ConvergenceError(FmpbemError):
    """A series or iteration failed to converge"""
    pass
