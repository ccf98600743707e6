"""Nanomechanical displacement detection through a superconducting microwave
cavity: device model, thermal and driven beam dynamics, homodyne detection
chain, spectral analysis and quantum-limit projections.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from cavilab._core import *  # noqa: F401,F403
from cavilab._core import __doc__ as _core_doc  # noqa: F401
