"""
    fmpbem/runner/__init__.py

    Application layer of fmpbem: scene validation, solver configuration,
    structured logging and the frequency-sweep runner behind fmpbem-run.
"""

__all__ = ["fmpbem_tools", "cli", "logging_module"]
