"""Lattice evolution models: particle simulators, deterministic limits and
potential-landscape analysis, backed by the C++ core."""

from ._specsim import *  # noqa: F401,F403
from ._specsim import __doc__  # noqa: F401
