"""Echo state property diagnostics for reservoir computers.

Signals are numpy arrays: 1-D for a univariate series, or 2-D with one row
per time step.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
