"""Tiles, structure annotations, and tile grids.

Annotations describe what a rectangular piece of an operand holds,
given the operand's declared structure.  Symmetric operands keep full
storage with one authoritative half; dead-half tiles are annotated as
mirrored transposes of their stored counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..frontend.astnodes import (
    Expr,
    Mul,
    OperandDecl,
    OperandRef,
    RegionRef,
    Transpose,
)

ZERO = "Zero"
GENERAL = "General"
UPTRI = "UpTri"
LOTRI = "LoTri"
MIRROR = "MirroredTranspose"


def annotation(decl: OperandDecl, r0: int, c0: int,
               rows: int, cols: int) -> str:
    """What the given piece of the operand holds structurally."""
    strict_lower = r0 > c0 + cols - 1       # every element has i > j
    strict_upper = c0 > r0 + rows - 1       # every element has j > i
    if "UpTri" in decl.properties:
        if strict_lower:
            return ZERO
        if strict_upper or rows == 0:
            return GENERAL
        return UPTRI if _on_diagonal(r0, c0, rows, cols) else GENERAL
    if "LoTri" in decl.properties:
        if strict_upper:
            return ZERO
        if strict_lower:
            return GENERAL
        return LOTRI if _on_diagonal(r0, c0, rows, cols) else GENERAL
    if "UpSym" in decl.properties and strict_lower:
        return MIRROR
    if "LoSym" in decl.properties and strict_upper:
        return MIRROR
    return GENERAL


def _on_diagonal(r0: int, c0: int, rows: int, cols: int) -> bool:
    # the piece crosses the operand diagonal
    return r0 <= c0 + cols - 1 and c0 <= r0 + rows - 1


@dataclass(frozen=True)
class Tile:
    """A physical piece of an operand, optionally loaded transposed.

    The logical value seen by a kernel is the stored rectangle,
    transposed when trans is set; ann describes the logical structure
    after that transpose.
    """

    name: str
    r0: int
    c0: int
    rows: int
    cols: int
    trans: bool = False
    ann: str = GENERAL

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cols, self.rows) if self.trans else (self.rows, self.cols)


def make_tile(decl: OperandDecl, r0: int, c0: int, rows: int, cols: int,
              trans: bool) -> Tile:
    ann = annotation(decl, r0, c0, rows, cols)
    if ann == MIRROR:
        # full storage keeps the dead half materialized; read it directly
        ann = GENERAL
    if trans:
        ann = {UPTRI: LOTRI, LOTRI: UPTRI}.get(ann, ann)
    return Tile(decl.name, r0, c0, rows, cols, trans, ann)


@dataclass(frozen=True)
class TileGrid:
    """Annotation grid of one operand at a fixed tile size."""

    operand: str
    tile_rows: int
    tile_cols: int
    row_blocks: tuple[tuple[int, int], ...]  # (offset, size) with leftovers
    col_blocks: tuple[tuple[int, int], ...]
    anns: tuple[tuple[str, ...], ...]

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.row_blocks), len(self.col_blocks))

    def ann(self, i: int, j: int) -> str:
        return self.anns[i][j]


def _blocks(n: int, b: int) -> tuple[tuple[int, int], ...]:
    out = []
    k = 0
    while k < n:
        size = min(b, n - k)
        out.append((k, size))
        k += size
    return tuple(out)


def grid_of(decl: OperandDecl, nu: int) -> TileGrid:
    rb = _blocks(decl.rows, nu)
    cb = _blocks(decl.cols, nu)
    anns = tuple(
        tuple(annotation(decl, i, j, bi, bj) for (j, bj) in cb)
        for (i, bi) in rb)
    return TileGrid(decl.name, nu, nu, rb, cb, anns)


def propagate_structure(decls: dict[str, OperandDecl], expr: Expr,
                        nu: int) -> dict[str, TileGrid]:
    """Annotated grids for every operand an expression reads.

    Annotations come from declared structure; intermediates of compound
    expressions are treated as general (sound: evaluating non-Zero
    tiles only still reproduces the dense result).
    """
    grids: dict[str, TileGrid] = {}

    def walk(e: Expr) -> None:
        if isinstance(e, OperandRef):
            grids[e.name] = grid_of(decls[e.name], nu)
        elif isinstance(e, RegionRef):
            grids.setdefault(e.name, grid_of(decls[e.name], nu))
        elif isinstance(e, (Mul, Transpose)) or hasattr(e, "children"):
            for c in e.children():
                walk(c)

    walk(expr)
    return grids


def loader_spec(tile: Tile, nu: int) -> str:
    """Loader kind a codelet needs for this tile."""
    rows, cols = tile.shape
    masked = rows < nu and rows > 1 or cols < nu and cols > 1
    if tile.ann in (UPTRI, LOTRI):
        return "triangular-masked"
    if tile.trans:
        return "transposed"
    if masked:
        return "masked-leftover"
    return "full"


def zero_tile(tile: Optional[Tile]) -> bool:
    return tile is not None and tile.ann == ZERO
