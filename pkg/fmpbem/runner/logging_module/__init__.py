from . import system_logger

__all__ = ["system_logger"]
