"""Interleaved audio-text instruction pipeline (bindings over the C++ core).

The heavy lifting lives in the `_core` extension module; this package
re-exports its public surface.
"""

from audioweave._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
