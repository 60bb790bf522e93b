"""Symbolic block-matrix algebra for PME generation.

Expressions are sums of integer-weighted products of atoms, where an atom
is a region of an operand (e.g. U_TL, possibly transposed).  Products keep
factor order (matrix multiplication does not commute); transposition is
pushed down to the atoms.  This is just enough algebra to partition a
defining equation, multiply out the blocks, and compare the result against
a reference up to term rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True, order=True)
class Atom:
    """One region of one operand, optionally transposed."""

    op: str
    block: str = ""  # "", TL, TR, BL, BR, L, R, T, B
    t: bool = False

    def transposed(self) -> "Atom":
        return Atom(self.op, self.block, not self.t)

    def __str__(self) -> str:
        s = f"{self.op}_{self.block}" if self.block else self.op
        return s + "'" if self.t else s


# A term is (coefficient, factor tuple); an expression is a sorted tuple
# of terms with nonzero coefficients.
Term = tuple[int, tuple[Atom, ...]]
SymExpr = tuple[Term, ...]

ZERO: SymExpr = ()


def atom(op: str, block: str = "", t: bool = False) -> SymExpr:
    return ((1, (Atom(op, block, t),)),)


def normalize(terms: Iterable[Term]) -> SymExpr:
    acc: dict[tuple[Atom, ...], int] = {}
    for coeff, factors in terms:
        acc[factors] = acc.get(factors, 0) + coeff
    return tuple(sorted((c, f) for f, c in acc.items() if c != 0))


def add(*exprs: SymExpr) -> SymExpr:
    return normalize(t for e in exprs for t in e)


def neg(expr: SymExpr) -> SymExpr:
    return tuple((-c, f) for c, f in expr)


def sub(a: SymExpr, b: SymExpr) -> SymExpr:
    return add(a, neg(b))


def mul(a: SymExpr, b: SymExpr) -> SymExpr:
    return normalize((ca * cb, fa + fb) for ca, fa in a for cb, fb in b)


def transpose(expr: SymExpr) -> SymExpr:
    return normalize(
        (c, tuple(f.transposed() for f in reversed(fs))) for c, fs in expr)


def atoms_of(expr: SymExpr) -> set[Atom]:
    return {f for _, fs in expr for f in fs}


def sym_str(expr: SymExpr) -> str:
    if not expr:
        return "0"
    parts = []
    for c, fs in expr:
        body = "*".join(str(f) for f in fs)
        if abs(c) != 1:
            body = f"{abs(c)}*{body}"
        parts.append(("- " if c < 0 else "+ ") + body)
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


# -- block grids -------------------------------------------------------

Grid = tuple[tuple[SymExpr, ...], ...]


def grid_of(rows: list[list[SymExpr]]) -> Grid:
    return tuple(tuple(r) for r in rows)


def gmul(a: Grid, b: Grid) -> Grid:
    assert len(a[0]) == len(b)
    return tuple(
        tuple(add(*[mul(a[i][k], b[k][j]) for k in range(len(b))])
              for j in range(len(b[0])))
        for i in range(len(a)))


def gadd(a: Grid, b: Grid) -> Grid:
    return tuple(tuple(add(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def gsub(a: Grid, b: Grid) -> Grid:
    return tuple(tuple(sub(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def gtranspose(a: Grid) -> Grid:
    return tuple(tuple(transpose(a[i][j]) for i in range(len(a)))
                 for j in range(len(a[0])))


# -- equations ---------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    """lhs = rhs over symbolic block expressions."""

    lhs: SymExpr
    rhs: SymExpr

    def diff(self) -> SymExpr:
        """Canonical lhs - rhs with positive leading coefficient."""
        d = sub(self.lhs, self.rhs)
        if d and d[0][0] < 0:
            d = neg(d)
        return d

    def is_trivial(self) -> bool:
        return not self.diff()

    def __str__(self) -> str:
        return f"{sym_str(self.lhs)} = {sym_str(self.rhs)}"


def equations_equal(a: Equation, b: Equation) -> bool:
    """Equality up to rearrangement, global sign, and whole-equation transpose."""
    da, db = a.diff(), b.diff()
    if da == db:
        return True
    dt = sub(transpose(a.lhs), transpose(a.rhs))
    if dt and dt[0][0] < 0:
        dt = neg(dt)
    return dt == db
