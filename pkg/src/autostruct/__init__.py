"""Automatic presentations of nilpotent class-2 groups and FO model checking."""
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
