"""Mixed-Hessian certification and oscillatory operator experiments on Heisenberg-type groups."""

from ._core import *  # noqa: F401,F403
from ._core import Error, DomainError, DimensionError, NyquistError, CapacityError, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]
