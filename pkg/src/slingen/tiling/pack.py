"""Packing sibling scalar operations into vector statements.

Runs of adjacent scalar statements with the same expression shape whose
element addresses advance contiguously are replaced by one region
statement (rule R0 for divisions by a common scalar, analogous rules
for the other operators).  A packed division is further rewritten into
a reciprocal followed by a scalar-times-vector multiply (rule R1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from ..affine import Aff
from ..frontend.astnodes import (
    Add,
    Assign,
    Div,
    Expr,
    Literal,
    Mul,
    Neg,
    OperandDecl,
    RegionRef,
    Sqrt,
    Sub,
    Transpose,
)
from ..synthesis.basic import BasicProgram

_SLOT = "slot"


@dataclass(frozen=True)
class RewriteRecord:
    rule: str          # "R0", "R1", or "pack-<op>"
    detail: str
    index: int         # statement index in the input program
    count: int         # scalar statements replaced


def _is_scalar_region(e: Expr) -> bool:
    return (isinstance(e, RegionRef)
            and e.rows.eval({}) == 1 and e.cols.eval({}) == 1)


def _scalar_stmt(s: Assign) -> bool:
    if not _is_scalar_region(s.lhs):
        return False
    return all(_is_scalar_region(n) or not isinstance(n, RegionRef)
               for n in s.rhs.walk()) and all(
        not isinstance(n, RegionRef) or _is_scalar_region(n)
        for n in s.rhs.walk())


def _skeleton(e: Expr, slots: list[tuple[str, int, int]]):
    if isinstance(e, RegionRef):
        slots.append((e.name, e.row_off.eval({}), e.col_off.eval({})))
        return _SLOT
    if isinstance(e, Literal):
        return ("lit", e.value)
    if isinstance(e, (Add, Sub, Mul, Div)):
        a = _skeleton(e.left, slots)
        b = _skeleton(e.right, slots)
        return (type(e).__name__, a, b)
    if isinstance(e, (Neg, Sqrt, Transpose)):
        return (type(e).__name__, _skeleton(e.child, slots))
    raise TypeError(type(e).__name__)


def _rebuild(key, exprs: Iterator[Expr]) -> Expr:
    if key == _SLOT:
        return next(exprs)
    if key[0] == "lit":
        return Literal(key[1])
    if key[0] in ("Add", "Sub", "Mul", "Div"):
        cls = {"Add": Add, "Sub": Sub, "Mul": Mul, "Div": Div}[key[0]]
        left = _rebuild(key[1], exprs)
        return cls(left, _rebuild(key[2], exprs))
    cls = {"Neg": Neg, "Sqrt": Sqrt, "Transpose": Transpose}[key[0]]
    return cls(_rebuild(key[1], exprs))


def _analyze(s: Assign):
    slots: list[tuple[str, int, int]] = []
    lhs_key = _skeleton(s.lhs, slots)
    key = (lhs_key, _skeleton(s.rhs, slots))
    return key, slots


_RUN_DELTAS = ((0, 1), (1, 0))


def _region(name: str, r0: int, c0: int, rows: int, cols: int) -> RegionRef:
    return RegionRef(name, Aff(r0), Aff(c0), Aff(rows), Aff(cols))


def _strip(base: tuple[str, int, int], delta: tuple[int, int],
           length: int) -> RegionRef:
    name, r0, c0 = base
    if delta == (0, 1):
        return _region(name, r0, c0, 1, length)
    return _region(name, r0, c0, length, 1)


class _TempNames:
    def __init__(self, taken: set[str]):
        self._taken = set(taken)
        self._n = 0

    def fresh(self) -> str:
        while True:
            name = f"_p{self._n}"
            self._n += 1
            if name not in self._taken:
                self._taken.add(name)
                return name


def _try_run(stmts: list[Assign], start: int):
    """Longest packable run at start; returns (length, key, slots, deltas)."""
    key0, slots0 = _analyze(stmts[start])
    n_slots = len(slots0)
    deltas: Optional[list] = None
    length = 1
    written = {slots0[0][1:]}  # (r, c) cells of the lhs operand written
    lhs_name = slots0[0][0]
    while start + length < len(stmts):
        s = stmts[start + length]
        if not _scalar_stmt(s):
            break
        key, slots = _analyze(s)
        if key != key0 or len(slots) != n_slots:
            break
        if deltas is None:
            cand = []
            ok = True
            for a, b in zip(slots0, slots):
                if a[0] != b[0]:
                    ok = False
                    break
                d = (b[1] - a[1], b[2] - a[2])
                if d != (0, 0) and d not in _RUN_DELTAS:
                    ok = False
                    break
                cand.append(d)
            if not ok or cand[0] == (0, 0):
                break
            deltas = cand
        expect = [(nm, r + deltas[i][0] * length, c + deltas[i][1] * length)
                  for i, (nm, r, c) in enumerate(slots0)]
        if slots != expect:
            break
        # a member must not read a cell written earlier in the run
        reads = {(nm, r, c) for (nm, r, c) in slots[1:]}
        if any((lhs_name, r, c) in reads for (r, c) in written):
            break
        written.add(slots[0][1:])
        length += 1
    return length, key0, slots0, deltas


def pack_scalars(bp: BasicProgram):
    """Returns (packed program, rewrite log)."""
    out: list[Assign] = []
    log: list[RewriteRecord] = []
    decls = dict(bp.decls)
    names = _TempNames(set(decls))
    stmts = bp.stmts
    i = 0
    while i < len(stmts):
        s = stmts[i]
        if not _scalar_stmt(s):
            out.append(s)
            i += 1
            continue
        length, key, slots, deltas = _try_run(stmts, i)
        if length < 2:
            out.append(s)
            i += 1
            continue
        lhs_delta = deltas[0]
        exprs: list[Expr] = []
        for si, base in enumerate(slots):
            d = deltas[si]
            if d == (0, 0):
                exprs.append(_region(base[0], base[1], base[2], 1, 1))
            elif d == lhs_delta:
                exprs.append(_strip(base, d, length))
            else:
                exprs.append(Transpose(_strip(base, d, length)))
        it = iter(exprs)
        lhs = _rebuild(key[0], it)
        rhs = _rebuild(key[1], it)
        op = key[1][0] if isinstance(key[1], tuple) else "copy"
        denom_fixed = (isinstance(key[1], tuple) and key[1][0] == "Div"
                       and key[1][2] == _SLOT
                       and deltas[len(_lhs_slots(key)) + _left_slots(key)]
                       == (0, 0))
        if denom_fixed:
            log.append(RewriteRecord("R0", "divisions packed over a common "
                                     "denominator", i, length))
            tname = names.fresh()
            decls[tname] = OperandDecl(tname, "scalar", 1, 1, "Tmp")
            recip = _region(tname, 0, 0, 1, 1)
            out.append(Assign(recip, Div(Literal(1.0), rhs.right), s.line))
            out.append(Assign(lhs, Mul(recip, rhs.left), s.line))
            log.append(RewriteRecord("R1", "packed division rewritten to "
                                     "reciprocal and multiply", i, length))
        else:
            out.append(Assign(lhs, rhs, s.line))
            log.append(RewriteRecord(f"pack-{op.lower()}",
                                     f"{length} scalar {op.lower()} "
                                     "statements packed", i, length))
        i += length
    return BasicProgram(decls, out, bp.name), log


def _lhs_slots(key) -> list:
    # the lhs skeleton is always a single slot for scalar statements
    return [key[0]]


def _left_slots(key) -> int:
    """Slot count in the left child of the top-level rhs operator."""
    def count(k) -> int:
        if k == _SLOT:
            return 1
        if not isinstance(k, tuple) or k[0] == "lit":
            return 0
        return sum(count(c) for c in k[1:])
    return count(key[1][1])
