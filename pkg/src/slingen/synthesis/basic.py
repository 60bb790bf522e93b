"""Basic programs: the output of HLAC lowering.

A BasicProgram is a flat, fully concrete statement list (every index an
integer) over regions of program operands and synthesis temporaries.
Flattening at this level keeps later stages simple; loop structure is
reintroduced by the tiler where extents make it worthwhile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..affine import Aff
from ..frontend.astnodes import Assign, Expr, OperandDecl, RegionRef


@dataclass(frozen=True)
class R:
    """A concrete rectangular region of a named array."""

    name: str
    r0: int
    c0: int
    rows: int
    cols: int

    def sub(self, i: int, j: int, rows: int, cols: int) -> "R":
        assert 0 <= i and i + rows <= self.rows
        assert 0 <= j and j + cols <= self.cols
        return R(self.name, self.r0 + i, self.c0 + j, rows, cols)

    def at(self, i: int, j: int) -> "R":
        return self.sub(i, j, 1, 1)

    def row(self, i: int, j: int = 0, cols: int | None = None) -> "R":
        return self.sub(i, j, 1, self.cols - j if cols is None else cols)

    def col(self, j: int, i: int = 0, rows: int | None = None) -> "R":
        return self.sub(i, j, self.rows - i if rows is None else rows, 1)

    @property
    def ref(self) -> RegionRef:
        return RegionRef(self.name, Aff(self.r0), Aff(self.c0),
                         Aff(self.rows), Aff(self.cols))


def whole(decl: OperandDecl) -> R:
    return R(decl.name, 0, 0, decl.rows, decl.cols)


@dataclass
class BasicProgram:
    """Declarations (program operands plus temps) and concrete statements."""

    decls: dict[str, OperandDecl]
    stmts: list[Assign]
    name: str = "program"

    def temps(self) -> list[OperandDecl]:
        return [d for d in self.decls.values() if d.iotype == "Tmp"]


class Emitter:
    """Accumulates statements and temporary declarations during lowering."""

    def __init__(self, taken: set[str]):
        self.stmts: list[Assign] = []
        self.temp_decls: list[OperandDecl] = []
        self._taken = set(taken)
        self._counter = 0

    def temp(self, rows: int, cols: int, hint: str = "t") -> R:
        while True:
            name = f"_{hint}{self._counter}"
            self._counter += 1
            if name not in self._taken:
                break
        self._taken.add(name)
        kind = "scalar" if rows == cols == 1 else (
            "vector" if cols == 1 else "matrix")
        self.temp_decls.append(OperandDecl(name, kind, rows, cols, "Tmp"))
        return R(name, 0, 0, rows, cols)

    def emit(self, lhs: Expr, rhs: Expr) -> None:
        self.stmts.append(Assign(lhs, rhs))


def blocks(n: int, b: int) -> list[tuple[int, int]]:
    """(offset, size) pairs covering 0..n in blocks of b with a short tail."""
    out = []
    k = 0
    while k < n:
        size = min(b, n - k)
        out.append((k, size))
        k += size
    return out
