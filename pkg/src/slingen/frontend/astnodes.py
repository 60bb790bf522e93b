"""AST for the LA input language and for lowered basic programs.

The same node set serves two purposes: parsed source programs (operands
referenced whole, sizes possibly symbolic) and synthesized basic programs
(region references with affine offsets, loops over block indices).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..affine import Aff

Size = Union[int, str]

PROPERTIES = ("LoTri", "UpTri", "UpSym", "LoSym", "PD", "NS", "UnitDiag")


@dataclass(frozen=True)
class OperandDecl:
    name: str
    kind: str  # "matrix" | "vector" | "scalar"
    rows: Size
    cols: Size
    iotype: str  # "In" | "Out" | "InOut"
    properties: frozenset[str] = frozenset()
    overwrites: Optional[str] = None
    line: int = 0

    @property
    def is_triangular(self) -> bool:
        return bool(self.properties & {"LoTri", "UpTri"})

    @property
    def is_symmetric(self) -> bool:
        return bool(self.properties & {"UpSym", "LoSym"})

    def with_sizes(self, rows: int, cols: int) -> "OperandDecl":
        return OperandDecl(self.name, self.kind, rows, cols, self.iotype,
                           self.properties, self.overwrites, self.line)


class Expr:
    """Base class; concrete nodes below."""

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def walk(self) -> Iterator["Expr"]:
        yield self
        for c in self.children():
            yield from c.walk()


@dataclass(frozen=True)
class OperandRef(Expr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class RegionRef(Expr):
    """Rectangular sub-region of an operand with affine offsets/extents."""

    name: str
    row_off: Aff
    col_off: Aff
    rows: Aff
    cols: Aff

    def __str__(self) -> str:
        return (f"{self.name}[{self.row_off}:{self.row_off + self.rows},"
                f" {self.col_off}:{self.col_off + self.cols}]")


@dataclass(frozen=True)
class Literal(Expr):
    value: float

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class _Bin(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Add(_Bin):
    pass


class Sub(_Bin):
    pass


class Mul(_Bin):
    pass


class Div(_Bin):
    pass


@dataclass(frozen=True)
class _Un(Expr):
    child: Expr

    def children(self):
        return (self.child,)


class Transpose(_Un):
    pass


class Neg(_Un):
    pass


class Sqrt(_Un):
    pass


class Inverse(_Un):
    pass


class StatementClass(enum.Enum):
    SBLAC = "sBLAC"
    HLAC = "HLAC"
    SCALAR_OP = "ScalarOp"


@dataclass
class Assign:
    lhs: Expr
    rhs: Expr
    line: int = 0

    def children_exprs(self) -> tuple[Expr, Expr]:
        return (self.lhs, self.rhs)


@dataclass
class For:
    var: str
    lo: Aff
    hi: Aff  # exclusive
    step: int
    body: list["Statement"] = field(default_factory=list)
    line: int = 0


Statement = Union[Assign, For]


@dataclass
class Program:
    """Parsed program: declaration groups in source order plus statements."""

    decl_groups: list[list[OperandDecl]]
    stmts: list[Statement]
    name: str = "program"

    @property
    def decls(self) -> list[OperandDecl]:
        return [d for g in self.decl_groups for d in g]


@dataclass
class CheckedProgram:
    """Type/shape-checked program with all sizes bound to integers."""

    decls: dict[str, OperandDecl]
    stmts: list[Statement]
    classes: dict[int, StatementClass]  # id(assign) -> class
    name: str = "program"
    unknowns: dict[int, frozenset[str]] = field(default_factory=dict)

    def decl(self, name: str) -> OperandDecl:
        return self.decls[name]

    def class_of(self, stmt: Assign) -> StatementClass:
        return self.classes[id(stmt)]

    def assigns(self) -> Iterator[Assign]:
        def rec(stmts):
            for s in stmts:
                if isinstance(s, For):
                    yield from rec(s.body)
                else:
                    yield s
        yield from rec(self.stmts)


def operands_of(expr: Expr) -> list[str]:
    seen: list[str] = []
    for node in expr.walk():
        if isinstance(node, (OperandRef, RegionRef)) and node.name not in seen:
            seen.append(node.name)
    return seen
