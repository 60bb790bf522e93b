"""C-like intermediate representation and its transformations.

The IR is a flat list of vector/scalar instructions over named values
and region-addressed memory, with affine loops available for manually
built functions.  Tiled programs lower to straight-line IR; the
interpreter compiles IR to Python for bit-exact reference execution
and reports a structure-aware flop count.
"""

from .ir import (
    CIRFunction,
    If,
    Loop,
    MemRegion,
    Param,
    SBin,
    SConst,
    SLoad,
    SStore,
    SUn,
    VBin,
    VBlend,
    VBroadcast,
    VExtract,
    VLoad,
    VReduce,
    VShuffle,
    VStore,
    dump,
)
from .build import to_cir
from .interp import count_flops, count_ops, interpret, make_runner
from .transforms import loadstore_analysis, unroll_and_scalarize

__all__ = [
    "CIRFunction",
    "If",
    "Loop",
    "MemRegion",
    "Param",
    "SBin",
    "SConst",
    "SLoad",
    "SStore",
    "SUn",
    "VBin",
    "VBlend",
    "VBroadcast",
    "VExtract",
    "VLoad",
    "VReduce",
    "VShuffle",
    "VStore",
    "count_flops",
    "count_ops",
    "dump",
    "interpret",
    "loadstore_analysis",
    "make_runner",
    "to_cir",
    "unroll_and_scalarize",
]
