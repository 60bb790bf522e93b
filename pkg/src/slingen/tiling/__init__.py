"""Tiling of basic programs into vector-size codelet calls.

The tiler decomposes every region-level statement into calls against a
small closed registry of vector-size kernels, propagating declared
matrix structure to skip zero tiles, computing symmetric outputs
half-only (the dead half is filled by transpose copies), and packing
runs of sibling scalar operations into vector statements first.
"""

from .pack import RewriteRecord, pack_scalars
from .registry import Kernel, NoKernelError, match, registry_kernels, shape_of
from .tile import (
    CodeletCall,
    ScalarStmt,
    TiledProgram,
    format_tiled,
    tile_program,
)
from .tiles import Tile, TileGrid, annotation, propagate_structure

__all__ = [
    "CodeletCall",
    "Kernel",
    "NoKernelError",
    "RewriteRecord",
    "ScalarStmt",
    "Tile",
    "TileGrid",
    "TiledProgram",
    "annotation",
    "format_tiled",
    "match",
    "pack_scalars",
    "propagate_structure",
    "registry_kernels",
    "shape_of",
    "tile_program",
]
