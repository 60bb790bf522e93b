"""Decomposition of region statements into codelet calls.

Statements are first binarized (one operator each, temporaries
materialized), symmetric whole-operand writes are marked for half
computation, and each single-operator statement is cut into tiles of
the vector length with structure-based zero-tile elision.  Dead halves
of symmetric outputs are filled with transpose copies at the end of the
defining statement, so downstream reads stay dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

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
from ..synthesis.basic import BasicProgram, R, blocks
from . import registry
from .tiles import GENERAL, Tile, make_tile

NU = 4


@dataclass(frozen=True)
class Opnd:
    """A region operand (optionally transposed) or a literal."""

    region: Optional[R] = None
    trans: bool = False
    lit: Optional[float] = None

    @property
    def rows(self) -> int:
        assert self.region is not None
        return self.region.cols if self.trans else self.region.rows

    @property
    def cols(self) -> int:
        assert self.region is not None
        return self.region.rows if self.trans else self.region.cols

    @property
    def scalar(self) -> bool:
        return self.lit is not None or (self.rows == 1 and self.cols == 1)


@dataclass
class RStmt:
    """One single-operator statement over regions."""

    op: str                      # add sub mul smul div neg copy
    out: R
    ins: tuple[Opnd, ...]
    acc: str = "set"             # "set" | "add" | "sub"
    half: Optional[str] = None   # "upper" | "lower": compute stored half only


@dataclass(frozen=True)
class CodeletCall:
    kernel: str
    out: Tile
    ins: tuple[Union[Tile, float], ...]
    acc: str = "set"


@dataclass(frozen=True)
class ScalarStmt:
    stmt: Assign


@dataclass
class TiledProgram:
    decls: dict[str, OperandDecl]
    stmts: list  # CodeletCall | ScalarStmt
    name: str = "program"
    nu: int = NU


def _to_r(e: RegionRef) -> R:
    return R(e.name, e.row_off.eval({}), e.col_off.eval({}),
             e.rows.eval({}), e.cols.eval({}))


def _is_scalar_expr(e: Expr) -> bool:
    for n in e.walk():
        if isinstance(n, RegionRef):
            if n.rows.eval({}) != 1 or n.cols.eval({}) != 1:
                return False
    return True


class _Binarizer:
    def __init__(self, decls: dict[str, OperandDecl]):
        self.decls = dict(decls)
        self.items: list[Union[RStmt, Assign]] = []
        self._taken = set(decls)
        self._n = 0

    def temp(self, rows: int, cols: int) -> R:
        while True:
            name = f"_b{self._n}"
            self._n += 1
            if name not in self._taken:
                break
        self._taken.add(name)
        kind = "scalar" if rows == cols == 1 else (
            "vector" if cols == 1 else "matrix")
        self.decls[name] = OperandDecl(name, kind, rows, cols, "Tmp")
        return R(name, 0, 0, rows, cols)

    def _shape(self, e: Expr) -> tuple[int, int]:
        if isinstance(e, RegionRef):
            return (e.rows.eval({}), e.cols.eval({}))
        if isinstance(e, Literal):
            return (1, 1)
        if isinstance(e, Transpose):
            r, c = self._shape(e.child)
            return (c, r)
        if isinstance(e, (Neg, Sqrt)):
            return self._shape(e.child)
        if isinstance(e, (Add, Sub)):
            return self._shape(e.left)
        if isinstance(e, Div):
            return self._shape(e.left)
        if isinstance(e, Mul):
            ra, ca = self._shape(e.left)
            rb, cb = self._shape(e.right)
            if ra == ca == 1:
                return (rb, cb)
            if rb == cb == 1:
                return (ra, ca)
            return (ra, cb)
        raise TypeError(type(e).__name__)

    def operand(self, e: Expr) -> Opnd:
        if isinstance(e, RegionRef):
            return Opnd(region=_to_r(e))
        if isinstance(e, Literal):
            return Opnd(lit=float(e.value))
        if isinstance(e, Transpose):
            o = self.operand(e.child)
            if o.lit is not None or o.scalar:
                return o
            return Opnd(region=o.region, trans=not o.trans)
        rows, cols = self._shape(e)
        t = self.temp(rows, cols)
        self.define(t, e)
        return Opnd(region=t)

    def single(self, e: Expr) -> tuple[str, tuple[Opnd, ...]]:
        if isinstance(e, Mul):
            a = self.operand(e.left)
            b = self.operand(e.right)
            if a.scalar:
                return ("smul", (a, b))
            if b.scalar:
                return ("smul", (b, a))
            return ("mul", (a, b))
        if isinstance(e, (Add, Sub)):
            op = "add" if isinstance(e, Add) else "sub"
            return (op, (self.operand(e.left), self.operand(e.right)))
        if isinstance(e, Div):
            b = self.operand(e.right)
            assert b.scalar, "non-scalar divisor"
            return ("div", (self.operand(e.left), b))
        if isinstance(e, Neg):
            return ("neg", (self.operand(e.child),))
        if isinstance(e, (RegionRef, Transpose, Literal)):
            return ("copy", (self.operand(e),))
        raise TypeError(f"cannot binarize {type(e).__name__}")

    def define(self, out: R, e: Expr) -> None:
        op, ins = self.single(e)
        self.items.append(RStmt(op, out, ins))

    def accumulate(self, out: R, term: Expr, sign: str) -> None:
        flip = {"add": "sub", "sub": "add"}
        if isinstance(term, Add):
            self.accumulate(out, term.left, sign)
            self.accumulate(out, term.right, sign)
            return
        if isinstance(term, Sub):
            self.accumulate(out, term.left, sign)
            self.accumulate(out, term.right, flip[sign])
            return
        if isinstance(term, Neg):
            self.accumulate(out, term.child, flip[sign])
            return
        op, ins = self.single(term)
        if op in ("mul", "smul"):
            self.items.append(RStmt(op, out, ins, acc=sign))
        else:
            # fold the term elementwise: out = out <sign> value
            val = ins[0] if op == "copy" else None
            if val is None:
                rows, cols = self._shape(term)
                t = self.temp(rows, cols)
                self.items.append(RStmt(op, t, ins))
                val = Opnd(region=t)
            self.items.append(RStmt(sign, out,
                                    (Opnd(region=out), val)))

    def statement(self, a: Assign) -> None:
        if _is_scalar_expr(a.lhs) and _is_scalar_expr(a.rhs):
            self.items.append(a)
            return
        assert isinstance(a.lhs, RegionRef)
        lhs = _to_r(a.lhs)
        rhs = a.rhs
        if isinstance(rhs, (Add, Sub)) and _same_region(rhs.left, lhs):
            self.accumulate(lhs, rhs.right,
                            "add" if isinstance(rhs, Add) else "sub")
        else:
            self.define(lhs, rhs)


def _same_region(e: Expr, r: R) -> bool:
    return (isinstance(e, RegionRef) and e.name == r.name
            and e.row_off.eval({}) == r.r0 and e.col_off.eval({}) == r.c0
            and e.rows.eval({}) == r.rows and e.cols.eval({}) == r.cols)


_ELEMENTWISE = ("add", "sub", "neg", "copy", "smul", "div")


def _mark_halves(items, decls: dict[str, OperandDecl]) -> None:
    want: dict[str, str] = {}
    for it in reversed(items):
        if not isinstance(it, RStmt):
            continue
        name = it.out.name
        uplo = want.pop(name, None)
        if uplo is None:
            d = decls.get(name)
            if (d is not None and d.is_symmetric
                    and d.iotype in ("Out", "InOut")
                    and it.out.r0 == 0 and it.out.c0 == 0
                    and it.out.rows == d.rows and it.out.cols == d.cols):
                uplo = "upper" if "UpSym" in d.properties else "lower"
        if uplo is None:
            continue
        it.half = uplo
        if it.op not in _ELEMENTWISE:
            continue
        for o in it.ins:
            if o.region is None:
                continue
            od = decls.get(o.region.name)
            if (od is not None and od.iotype == "Tmp"
                    and o.region.rows == od.rows == od.cols
                    and o.region.cols == od.cols
                    and o.region.r0 == 0 and o.region.c0 == 0):
                flip = {"upper": "lower", "lower": "upper"}
                want[o.region.name] = flip[uplo] if o.trans else uplo


def _dead_tile(half: Optional[str], r0: int, c0: int,
               rows: int, cols: int) -> bool:
    if half == "upper":                 # stored upper: skip strict lower
        return r0 > c0 + cols - 1
    if half == "lower":
        return c0 > r0 + rows - 1
    return False


class _Tiler:
    def __init__(self, decls: dict[str, OperandDecl], nu: int):
        self.decls = decls
        self.nu = nu
        self.calls: list = []

    def _tile(self, o: Opnd, rblk: tuple[int, int],
              cblk: tuple[int, int]) -> Tile:
        """Tile of a logical (post-transpose) operand view."""
        assert o.region is not None
        i, bi = rblk
        j, bj = cblk
        reg = o.region
        if o.trans:
            return make_tile(self.decls[reg.name], reg.r0 + j, reg.c0 + i,
                             bj, bi, True)
        return make_tile(self.decls[reg.name], reg.r0 + i, reg.c0 + j,
                         bi, bj, False)

    def _scalar_in(self, o: Opnd) -> Union[Tile, float]:
        if o.lit is not None:
            return o.lit
        reg = o.region
        return make_tile(self.decls[reg.name], reg.r0, reg.c0, 1, 1, False)

    def _out_tile(self, out: R, i: int, j: int, bi: int, bj: int) -> Tile:
        return Tile(out.name, out.r0 + i, out.c0 + j, bi, bj, False, GENERAL)

    def emit(self, kernel_op: str, out_tile: Tile,
             ins: tuple, acc: str) -> None:
        shapes = tuple(
            "s" if isinstance(t, float) else registry.shape_of(*t.shape)
            for t in ins)
        if kernel_op == "mul":
            # leftover tiles can shrink a product operand to a scalar
            if shapes == ("s", "s"):
                kernel_op = "smul"
            elif shapes[0] == "s":
                kernel_op = "smul"
            elif shapes[1] == "s":
                kernel_op = "smul"
                ins = (ins[1], ins[0])
                shapes = (shapes[1], shapes[0])
        k = registry.match(kernel_op, shapes)
        self.calls.append(CodeletCall(k.id, out_tile, ins, acc))

    def elementwise(self, st: RStmt) -> None:
        out = st.out
        for (i, bi) in blocks(out.rows, self.nu):
            for (j, bj) in blocks(out.cols, self.nu):
                if _dead_tile(st.half, out.r0 + i, out.c0 + j, bi, bj):
                    continue
                o_tile = self._out_tile(out, i, j, bi, bj)
                ins = tuple(self._tile(o, (i, bi), (j, bj)) for o in st.ins)
                self.emit(st.op, o_tile, ins, st.acc)

    def scaled(self, st: RStmt) -> None:
        # smul (scalar first) or div (scalar second), any accumulation
        if st.op == "smul":
            alpha = self._scalar_in(st.ins[0])
            x = st.ins[1]
        else:
            alpha = self._scalar_in(st.ins[1])
            x = st.ins[0]
        out = st.out
        for (i, bi) in blocks(out.rows, self.nu):
            for (j, bj) in blocks(out.cols, self.nu):
                if _dead_tile(st.half, out.r0 + i, out.c0 + j, bi, bj):
                    continue
                o_tile = self._out_tile(out, i, j, bi, bj)
                xt = self._tile(x, (i, bi), (j, bj))
                ins = (alpha, xt) if st.op == "smul" else (xt, alpha)
                self.emit(st.op, o_tile, ins, st.acc)

    def mul(self, st: RStmt) -> None:
        out = st.out
        a, b = st.ins
        kdim = a.cols
        kb = blocks(kdim, self.nu)
        for (i, bi) in blocks(out.rows, self.nu):
            for (j, bj) in blocks(out.cols, self.nu):
                if _dead_tile(st.half, out.r0 + i, out.c0 + j, bi, bj):
                    continue
                o_tile = self._out_tile(out, i, j, bi, bj)
                emitted = False
                for (k, bk) in kb:
                    ta = self._tile(a, (i, bi), (k, bk))
                    tb = self._tile(b, (k, bk), (j, bj))
                    if ta.ann == "Zero" or tb.ann == "Zero":
                        continue
                    acc = st.acc if st.acc != "set" else (
                        "set" if not emitted else "add")
                    self.emit("mul", o_tile, (ta, tb), acc)
                    emitted = True
                if not emitted and st.acc == "set":
                    shape = registry.shape_of(bi, bj)
                    kernel = registry.match("zero", (), shape)
                    self.calls.append(CodeletCall(kernel.id,
                                                  o_tile, (), "set"))

    def mirror_fill(self, name: str, uplo: str) -> None:
        """Transpose-copy the stored half onto the dead half (no flops)."""
        d = self.decls[name]
        bl = blocks(d.rows, self.nu)
        for bi_i, (i, bi) in enumerate(bl):
            for bj_i, (j, bj) in enumerate(bl):
                src_is_stored = (bi_i > bj_i) if uplo == "lower" \
                    else (bj_i > bi_i)
                if not src_is_stored:
                    continue
                # dead tile at the mirrored position reads the stored one
                dead = Tile(name, j, i, bj, bi, False, GENERAL)
                src = Tile(name, i, j, bi, bj, True, GENERAL)
                kernel = registry.match(
                    "copy", (registry.shape_of(*src.shape),))
                self.calls.append(CodeletCall(kernel.id, dead, (src,), "set"))

    def statement(self, st: RStmt) -> None:
        if st.op == "mul":
            self.mul(st)
        elif st.op in ("smul", "div"):
            self.scaled(st)
        else:
            self.elementwise(st)
        if st.half is not None:
            d = self.decls.get(st.out.name)
            if d is not None and d.iotype != "Tmp":
                self.mirror_fill(st.out.name, st.half)


def _tile_str(t: Union[Tile, float]) -> str:
    if isinstance(t, float):
        return repr(t)
    s = (f"{t.name}({t.r0}:{t.r0 + t.rows},{t.c0}:{t.c0 + t.cols})")
    if t.trans:
        s += "'"
    if t.ann != GENERAL:
        s += f"<{t.ann}>"
    return s


def format_tiled(tp: TiledProgram) -> str:
    """Region-level text form of a tiled program (for --dump-tiled)."""
    from ..frontend.pretty import pretty_stmt

    out = [f"program {tp.name} nu={tp.nu}"]
    for d in tp.decls.values():
        props = "" if not d.properties else \
            " <" + ", ".join(sorted(d.properties)) + ">"
        out.append(f"  {d.kind} {d.name}({d.rows},{d.cols}) "
                   f"{d.iotype}{props}")
    ops = {"set": "=", "add": "+=", "sub": "-="}
    for st in tp.stmts:
        if isinstance(st, ScalarStmt):
            out.append("  " + pretty_stmt(st.stmt).strip())
            continue
        ins = ", ".join(_tile_str(t) for t in st.ins)
        out.append(f"  {_tile_str(st.out)} {ops[st.acc]} {st.kernel}({ins})")
    return "\n".join(out) + "\n"


def tile_program(bp: BasicProgram, nu: int = NU) -> TiledProgram:
    binz = _Binarizer(bp.decls)
    for s in bp.stmts:
        binz.statement(s)
    _mark_halves(binz.items, binz.decls)
    tiler = _Tiler(binz.decls, nu)
    for it in binz.items:
        if isinstance(it, Assign):
            tiler.calls.append(ScalarStmt(it))
        else:
            tiler.statement(it)
    return TiledProgram(binz.decls, tiler.calls, bp.name, nu)
