"""C source emission for optimized IR.

A profile maps IR instructions to C: the scalar profile expands every
vector instruction into per-lane double arithmetic in the exact order
the interpreter uses, so compiled output (with FP contraction off)
reproduces interpreted results bit for bit.  The vec256 profile maps
four 64-bit lanes onto 256-bit vectors, keeping reductions sequential.
"""

from .profiles import SCALAR, VEC256, IsaProfile, profile_by_name
from .emit import EmitError, EmittedSource, emit, write_sources

__all__ = [
    "EmitError",
    "EmittedSource",
    "IsaProfile",
    "SCALAR",
    "VEC256",
    "emit",
    "profile_by_name",
    "write_sources",
]
