"""Lowering tiled programs to the C-like IR.

Each codelet call expands through the template of its registry kernel
into loads, vector arithmetic, and stores with extents taken from the
actual tiles, so partial tiles never read out of bounds.  Products
against structurally zero elements are skipped outright (the skipped
contribution is an exact zero), and lanes that only combine structural
zeros are excluded from the flop charge of the remaining instructions.
"""

from __future__ import annotations

from typing import Optional, Union

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
from ..tiling.tile import CodeletCall, ScalarStmt, TiledProgram
from ..tiling.tiles import LOTRI, UPTRI, Tile
from .ir import (
    HOR,
    VERT,
    CIRFunction,
    MemRegion,
    Param,
    SBin,
    SConst,
    SLoad,
    SStore,
    SUn,
    VBin,
    VBroadcast,
    VLoad,
    VReduce,
    VExtract,
    VStore,
    VUn,
)


def _canonical(name: str, decls: dict[str, OperandDecl]) -> str:
    """Buffer name after merging overwritten operands into their parent."""
    seen = {name}
    while True:
        d = decls.get(name)
        if d is None or d.overwrites is None:
            return name
        name = d.overwrites
        if name in seen:
            raise ValueError(f"cyclic overwrite chain at {name!r}")
        seen.add(name)


def _zero_elem(tile: Tile, i: int, k: int) -> bool:
    """Is logical element (i, k) of the tile structurally zero?"""
    if tile.ann not in (UPTRI, LOTRI):
        return False
    d = (tile.c0 - tile.r0) if tile.trans else (tile.r0 - tile.c0)
    if tile.ann == UPTRI:
        return k < i + d
    return k > i + d


def _active_row(tile: Tile, i: int) -> int:
    """Structurally nonzero lanes in logical row i."""
    cols = tile.shape[1]
    return sum(not _zero_elem(tile, i, k) for k in range(cols))


class _Builder:
    def __init__(self, tp: TiledProgram):
        self.tp = tp
        self.decls = tp.decls
        self.body = []
        self._n = 0

    def fresh(self, scalar: bool = False) -> str:
        name = f"{'s' if scalar else 'v'}{self._n}"
        self._n += 1
        return name

    def _buf(self, name: str) -> str:
        return _canonical(name, self.decls)

    def region(self, name: str, r: int, c: int, count: int,
               direction: str) -> MemRegion:
        return MemRegion(self._buf(name), Aff(r), Aff(c), count, direction)

    # tile loads: the logical value is the stored rectangle, transposed
    # when the tile says so; logical rows of transposed tiles become
    # vertical loads

    def load_scalar_elem(self, tile: Tile, i: int, k: int) -> str:
        if tile.trans:
            r, c = tile.r0 + k, tile.c0 + i
        else:
            r, c = tile.r0 + i, tile.c0 + k
        v = self.fresh(scalar=True)
        self.body.append(SLoad(v, self.region(tile.name, r, c, 1, HOR)))
        return v

    def load_row(self, tile: Tile, i: int) -> str:
        rows, cols = tile.shape
        v = self.fresh()
        if tile.trans:
            reg = self.region(tile.name, tile.r0, tile.c0 + i, cols, VERT)
        else:
            reg = self.region(tile.name, tile.r0 + i, tile.c0, cols, HOR)
        self.body.append(VLoad(v, reg))
        return v

    def load_col_vec(self, tile: Tile) -> str:
        """Load a v-shaped tile (one logical column) as one vector."""
        rows, _ = tile.shape
        v = self.fresh()
        if tile.trans:
            reg = self.region(tile.name, tile.r0, tile.c0, rows, HOR)
        else:
            reg = self.region(tile.name, tile.r0, tile.c0, rows, VERT)
        self.body.append(VLoad(v, reg))
        return v

    def store_row(self, tile: Tile, i: int, src: str) -> None:
        assert not tile.trans
        reg = self.region(tile.name, tile.r0 + i, tile.c0, tile.cols, HOR)
        self.body.append(VStore(reg, src))

    def store_col_vec(self, tile: Tile, src: str) -> None:
        assert not tile.trans
        reg = self.region(tile.name, tile.r0, tile.c0, tile.rows, VERT)
        self.body.append(VStore(reg, src))

    def broadcast(self, scalar: str, lanes: int) -> str:
        v = self.fresh()
        self.body.append(VBroadcast(v, scalar, lanes))
        return v

    def vbin(self, op: str, a: str, b: str, lanes: int,
             active: Optional[int] = None) -> str:
        v = self.fresh()
        self.body.append(VBin(v, op, a, b, lanes, active))
        return v

    def sbin(self, op: str, a: str, b: str) -> str:
        v = self.fresh(scalar=True)
        self.body.append(SBin(v, op, a, b))
        return v

    def sconst(self, value: float) -> str:
        v = self.fresh(scalar=True)
        self.body.append(SConst(v, value))
        return v

    def zero_vec(self, lanes: int) -> str:
        return self.broadcast(self.sconst(0.0), lanes)

    # combining a computed value with the destination under acc mode

    def combine_row(self, out: Tile, i: int, val: Optional[str],
                    acc: str, active: Optional[int] = None) -> None:
        lanes = out.cols
        if val is None:
            if acc == "set":
                self.store_row(out, i, self.zero_vec(lanes))
            return
        if acc != "set":
            old = self.load_row(out, i)
            op = "add" if acc == "add" else "sub"
            val = self.vbin(op, old, val, lanes, active)
        self.store_row(out, i, val)

    def combine_col(self, out: Tile, val: Optional[str], acc: str,
                    active: Optional[int] = None) -> None:
        lanes = out.rows
        if val is None:
            if acc == "set":
                self.store_col_vec(out, self.zero_vec(lanes))
            return
        if acc != "set":
            old = self.load_col_vec(out)
            op = "add" if acc == "add" else "sub"
            val = self.vbin(op, old, val, lanes, active)
        self.store_col_vec(out, val)

    def combine_scalar(self, out: Tile, val: Optional[str], acc: str) -> None:
        reg = self.region(out.name, out.r0, out.c0, 1, HOR)
        if val is None:
            if acc == "set":
                self.body.append(SStore(reg, self.sconst(0.0)))
            return
        if acc != "set":
            old = self.fresh(scalar=True)
            self.body.append(SLoad(old, reg))
            op = "add" if acc == "add" else "sub"
            val = self.sbin(op, old, val)
        self.body.append(SStore(reg, val))


def _shape_class(t: Union[Tile, float]) -> str:
    if isinstance(t, float):
        return "s"
    rows, cols = t.shape
    if rows == 1 and cols == 1:
        return "s"
    if cols == 1:
        return "v"
    if rows == 1:
        return "r"
    return "M"


def _load_value(b: _Builder, t: Union[Tile, float]):
    """Load a tile as its shape-class value representation."""
    sc = _shape_class(t)
    if sc == "s":
        if isinstance(t, float):
            return b.sconst(t)
        return b.load_scalar_elem(t, 0, 0)
    if sc == "v":
        return b.load_col_vec(t)
    if sc == "r":
        return b.load_row(t, 0)
    return [b.load_row(t, i) for i in range(t.shape[0])]


def _store_value(b: _Builder, out: Tile, val, acc: str) -> None:
    sc = _shape_class(out)
    if sc == "s":
        b.combine_scalar(out, val, acc)
    elif sc == "v":
        b.combine_col(out, val, acc)
    elif sc == "r":
        b.combine_row(out, 0, val, acc)
    else:
        for i in range(out.rows):
            b.combine_row(out, i, val[i], acc)


def _emit_elementwise(b: _Builder, call: CodeletCall, op: str) -> None:
    out = call.out
    sc = _shape_class(out)
    lanes = out.rows if sc == "v" else out.cols
    vals = [_load_value(b, t) for t in call.ins]
    if op == "copy":
        _store_value(b, out, vals[0], call.acc)
        return
    if sc == "s":
        if op == "neg":
            r = b.fresh(scalar=True)
            b.body.append(SUn(r, "neg", vals[0]))
        else:
            r = b.sbin(op, vals[0], vals[1])
        _store_value(b, out, r, call.acc)
        return
    if sc == "M":
        rows = []
        for i in range(out.rows):
            if op == "neg":
                v = b.fresh()
                b.body.append(VUn(v, "neg", vals[0][i], lanes))
                rows.append(v)
            else:
                rows.append(b.vbin(op, vals[0][i], vals[1][i], lanes))
        _store_value(b, out, rows, call.acc)
        return
    if op == "neg":
        r = b.fresh()
        b.body.append(VUn(r, "neg", vals[0], lanes))
    else:
        r = b.vbin(op, vals[0], vals[1], lanes)
    _store_value(b, out, r, call.acc)


def _emit_scaled(b: _Builder, call: CodeletCall, op: str) -> None:
    out = call.out
    sc = _shape_class(out)
    if op == "smul":
        alpha_t, x = call.ins
    else:
        x, alpha_t = call.ins
    alpha = _load_value(b, alpha_t)
    xv = _load_value(b, x)
    if sc == "s":
        r = b.sbin("mul" if op == "smul" else "div",
                   *((alpha, xv) if op == "smul" else (xv, alpha)))
        _store_value(b, out, r, call.acc)
        return
    lanes = out.rows if sc == "v" else out.cols
    bc = b.broadcast(alpha, lanes)
    vop = "mul" if op == "smul" else "div"
    if sc == "M":
        rows = [b.vbin(vop, *((bc, xv[i]) if op == "smul" else (xv[i], bc)),
                       lanes) for i in range(out.rows)]
        _store_value(b, out, rows, call.acc)
    else:
        args = (bc, xv) if op == "smul" else (xv, bc)
        _store_value(b, out, b.vbin(vop, *args, lanes), call.acc)


def _emit_zero(b: _Builder, call: CodeletCall) -> None:
    _store_value(b, call.out, None, "set")


def _dot_row(b: _Builder, a: Tile, i: int, b_rows: list[str],
             bt: Tile, lanes: int):
    """sum_k a(i, k) * brow_k with structural-zero products skipped.

    Returns (accumulated vector value or None, active lane count).
    The a-elements come from one vector load of the logical row with
    lane extracts when more than one is needed, so the load/store
    analysis can forward whole stored rows into it.
    """
    used = [k for k in range(a.shape[1])
            if not _zero_elem(a, i, k) and _active_row(bt, k) > 0]
    arow = None
    if len(used) > 1:
        arow = b.load_row(a, i)
    acc = None
    acc_active = 0
    for k in range(a.shape[1]):
        if _zero_elem(a, i, k):
            continue
        term_active = _active_row(bt, k)
        if term_active == 0:
            continue
        if arow is None:
            s = b.load_scalar_elem(a, i, k)
        else:
            s = b.fresh(scalar=True)
            b.body.append(VExtract(s, arow, k))
        bc = b.broadcast(s, lanes)
        p = b.vbin("mul", bc, b_rows[k], lanes,
                   None if term_active == lanes else term_active)
        if acc is None:
            acc = p
        else:
            acc = b.vbin("add", acc, p, lanes,
                         None if term_active == lanes else term_active)
        acc_active = max(acc_active, term_active)
    return acc, acc_active


def _emit_mul_MM(b: _Builder, call: CodeletCall) -> None:
    at, bt = call.ins
    out = call.out
    lanes = out.cols
    b_rows = [b.load_row(bt, k) for k in range(bt.shape[0])]
    for i in range(out.rows):
        acc, active = _dot_row(b, at, i, b_rows, bt, lanes)
        b.combine_row(out, i, acc, call.acc,
                      None if active in (0, lanes) else active)


def _emit_mul_rM(b: _Builder, call: CodeletCall) -> None:
    at, bt = call.ins
    out = call.out
    lanes = out.cols
    b_rows = [b.load_row(bt, k) for k in range(bt.shape[0])]
    acc, active = _dot_row(b, at, 0, b_rows, bt, lanes)
    b.combine_row(out, 0, acc, call.acc,
                  None if active in (0, lanes) else active)


def _emit_mul_Mv(b: _Builder, call: CodeletCall) -> None:
    at, vt = call.ins
    out = call.out
    k_lanes = at.shape[1]
    vvec = b.load_col_vec(vt)
    for i in range(out.rows):
        pairs = [k for k in range(k_lanes)
                 if not _zero_elem(at, i, k) and not _zero_elem(vt, k, 0)]
        if not pairs:
            _scalar_into(b, out, i, None, call.acc)
            continue
        arow = b.load_row(at, i)
        p = b.vbin("mul", arow, vvec, k_lanes,
                   None if len(pairs) == k_lanes else len(pairs))
        r = b.fresh(scalar=True)
        b.body.append(VReduce(r, p, k_lanes,
                              None if len(pairs) == k_lanes else len(pairs)))
        _scalar_into(b, out, i, r, call.acc)


def _scalar_into(b: _Builder, out: Tile, i: int, val: Optional[str],
                 acc: str) -> None:
    reg = b.region(out.name, out.r0 + i, out.c0, 1, HOR)
    if val is None:
        if acc == "set":
            b.body.append(SStore(reg, b.sconst(0.0)))
        return
    if acc != "set":
        old = b.fresh(scalar=True)
        b.body.append(SLoad(old, reg))
        val = b.sbin("add" if acc == "add" else "sub", old, val)
    b.body.append(SStore(reg, val))


def _emit_mul_vr(b: _Builder, call: CodeletCall) -> None:
    vt, rt = call.ins
    out = call.out
    lanes = out.cols
    rvec = b.load_row(rt, 0)
    r_active = _active_row(rt, 0)
    used = [i for i in range(out.rows)
            if not _zero_elem(vt, i, 0) and r_active > 0]
    vvec = b.load_col_vec(vt) if len(used) > 1 else None
    for i in range(out.rows):
        if _zero_elem(vt, i, 0) or r_active == 0:
            b.combine_row(out, i, None, call.acc)
            continue
        if vvec is None:
            s = b.load_scalar_elem(vt, i, 0)
        else:
            s = b.fresh(scalar=True)
            b.body.append(VExtract(s, vvec, i))
        bc = b.broadcast(s, lanes)
        p = b.vbin("mul", bc, rvec, lanes,
                   None if r_active == lanes else r_active)
        b.combine_row(out, i, p, call.acc,
                      None if r_active == lanes else r_active)


def _emit_mul_rv(b: _Builder, call: CodeletCall) -> None:
    rt, vt = call.ins
    out = call.out
    k_lanes = rt.shape[1]
    pairs = [k for k in range(k_lanes)
             if not _zero_elem(rt, 0, k) and not _zero_elem(vt, k, 0)]
    if not pairs:
        b.combine_scalar(out, None, call.acc)
        return
    a = b.load_row(rt, 0)
    v = b.load_col_vec(vt)
    p = b.vbin("mul", a, v, k_lanes,
               None if len(pairs) == k_lanes else len(pairs))
    r = b.fresh(scalar=True)
    b.body.append(VReduce(r, p, k_lanes,
                          None if len(pairs) == k_lanes else len(pairs)))
    b.combine_scalar(out, r, call.acc)


def _emit_call(b: _Builder, call: CodeletCall) -> None:
    op = call.kernel.split("_")[0]
    if op == "trans":
        flipped = Tile(call.ins[0].name, call.ins[0].r0, call.ins[0].c0,
                       call.ins[0].rows, call.ins[0].cols,
                       not call.ins[0].trans,
                       {UPTRI: LOTRI, LOTRI: UPTRI}.get(call.ins[0].ann,
                                                        call.ins[0].ann))
        _emit_elementwise(b, CodeletCall("copy", call.out, (flipped,),
                                         call.acc), "copy")
        return
    if op == "zero":
        _emit_zero(b, call)
    elif op in ("add", "sub", "neg", "copy"):
        _emit_elementwise(b, call, op)
    elif op in ("smul", "div"):
        _emit_scaled(b, call, op)
    elif op == "mul":
        shapes = tuple(_shape_class(t) for t in call.ins)
        if shapes == ("M", "M"):
            _emit_mul_MM(b, call)
        elif shapes == ("M", "v"):
            _emit_mul_Mv(b, call)
        elif shapes == ("r", "M"):
            _emit_mul_rM(b, call)
        elif shapes == ("v", "r"):
            _emit_mul_vr(b, call)
        elif shapes == ("r", "v"):
            _emit_mul_rv(b, call)
        else:
            raise ValueError(f"unexpected mul shapes {shapes}")
    else:
        raise ValueError(f"unknown kernel {call.kernel!r}")


def _emit_scalar_expr(b: _Builder, e: Expr) -> str:
    if isinstance(e, RegionRef):
        reg = b.region(e.name, e.row_off.eval({}), e.col_off.eval({}), 1, HOR)
        v = b.fresh(scalar=True)
        b.body.append(SLoad(v, reg))
        return v
    if isinstance(e, Literal):
        return b.sconst(float(e.value))
    if isinstance(e, Transpose):
        return _emit_scalar_expr(b, e.child)
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: "add", Sub: "sub", Mul: "mul", Div: "div"}[type(e)]
        left = _emit_scalar_expr(b, e.left)
        return b.sbin(op, left, _emit_scalar_expr(b, e.right))
    if isinstance(e, Neg):
        v = b.fresh(scalar=True)
        b.body.append(SUn(v, "neg", _emit_scalar_expr(b, e.child)))
        return v
    if isinstance(e, Sqrt):
        v = b.fresh(scalar=True)
        b.body.append(SUn(v, "sqrt", _emit_scalar_expr(b, e.child)))
        return v
    raise TypeError(type(e).__name__)


def _emit_scalar_stmt(b: _Builder, st: ScalarStmt) -> None:
    s: Assign = st.stmt
    val = _emit_scalar_expr(b, s.rhs)
    lhs = s.lhs
    assert isinstance(lhs, RegionRef)
    reg = b.region(lhs.name, lhs.row_off.eval({}), lhs.col_off.eval({}),
                   1, HOR)
    b.body.append(SStore(reg, val))


def _merged_iotype(parent: OperandDecl,
                   decls: dict[str, OperandDecl]) -> str:
    """IO type of a parameter after merging overwritten children."""
    kinds = {parent.iotype}
    for d in decls.values():
        if d.overwrites is not None and \
                _canonical(d.name, decls) == parent.name:
            kinds.add(d.iotype)
    if kinds == {"In"}:
        return "In"
    if kinds <= {"Out"}:
        return "Out"
    return "InOut"


def to_cir(tp: TiledProgram) -> CIRFunction:
    """Expand every codelet call of a tiled program into IR."""
    b = _Builder(tp)
    for st in tp.stmts:
        if isinstance(st, ScalarStmt):
            _emit_scalar_stmt(b, st)
        else:
            _emit_call(b, st)
    params: list[Param] = []
    temps: dict[str, tuple[int, int]] = {}
    for name, d in tp.decls.items():
        if d.iotype == "Tmp":
            temps[name] = (d.rows, d.cols)
        elif d.overwrites is None:
            params.append(Param(name, d.rows, d.cols,
                                _merged_iotype(d, tp.decls)))
    fn = CIRFunction(tp.name, params, temps, b.body, tp.nu)
    return fn
