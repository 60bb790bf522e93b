"""Semantic checking: size binding, shape inference, statement classing.

check() turns a parsed Program into a CheckedProgram with every size a
concrete integer, every statement shape-consistent, and every assignment
classified as sBLAC, HLAC, or scalar op.  HLAC unknowns (the operands a
statement implicitly solves for) are recorded for the synthesis stage.
"""

from __future__ import annotations

from typing import Mapping

from ..affine import Aff
from .astnodes import (
    Add,
    Assign,
    CheckedProgram,
    Div,
    Expr,
    For,
    Inverse,
    Literal,
    Mul,
    Neg,
    OperandDecl,
    OperandRef,
    Program,
    RegionRef,
    Sqrt,
    Statement,
    StatementClass,
    Sub,
    Transpose,
    operands_of,
)


class CheckError(Exception):
    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def _bind_size(size, bindings: Mapping[str, int], line: int) -> int:
    if isinstance(size, int):
        return size
    if size in bindings:
        val = bindings[size]
        if val <= 0:
            raise CheckError(f"size symbol {size!r} bound to non-positive {val}", line)
        return val
    raise CheckError(f"unbound size symbol {size!r}", line)


def _subst_expr(expr: Expr, env: Mapping[str, int]) -> Expr:
    """Substitute size symbols inside region indices."""
    if isinstance(expr, RegionRef):
        return RegionRef(expr.name,
                         expr.row_off.subst(env), expr.col_off.subst(env),
                         expr.rows.subst(env), expr.cols.subst(env))
    if isinstance(expr, (OperandRef, Literal)):
        return expr
    kids = tuple(_subst_expr(c, env) for c in expr.children())
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return type(expr)(kids[0], kids[1])
    return type(expr)(kids[0])


def classify(stmt: Assign, decls: Mapping[str, OperandDecl]) -> StatementClass:
    """Class of an assignment, independent of dataflow context.

    HLAC: the left-hand side is not a plain operand reference, or the
    right-hand side contains an explicit inverse.  Scalar op: every
    referenced operand is 1x1.  Everything else is an sBLAC.
    """
    if not isinstance(stmt.lhs, (OperandRef, RegionRef)):
        return StatementClass.HLAC
    if any(isinstance(n, Inverse) for n in stmt.rhs.walk()):
        return StatementClass.HLAC
    names = operands_of(stmt.lhs) + operands_of(stmt.rhs)
    if all(decls[n].kind == "scalar" for n in names if n in decls):
        return StatementClass.SCALAR_OP
    return StatementClass.SBLAC


class _Checker:
    def __init__(self, prog: Program, bindings: Mapping[str, int]):
        self.prog = prog
        self.bindings = dict(bindings)
        self.decls: dict[str, OperandDecl] = {}
        self.classes: dict[int, StatementClass] = {}
        self.unknowns: dict[int, frozenset[str]] = {}
        self.defined: set[str] = set()
        self.loop_vars: list[str] = []

    def run(self) -> CheckedProgram:
        self.check_decls()
        stmts = [self.check_stmt(s) for s in self.prog.stmts]
        for d in self.decls.values():
            if d.iotype in ("Out", "InOut") and d.name not in self.defined:
                raise CheckError(f"output operand {d.name!r} is never assigned", d.line)
        return CheckedProgram(self.decls, stmts, self.classes, self.prog.name,
                              self.unknowns)

    # -- declarations --------------------------------------------------
    def check_decls(self) -> None:
        for decl in self.prog.decls:
            if decl.name in self.decls:
                raise CheckError(f"duplicate operand {decl.name!r}", decl.line)
            rows = _bind_size(decl.rows, self.bindings, decl.line)
            cols = _bind_size(decl.cols, self.bindings, decl.line)
            if decl.kind == "vector" and cols != 1:
                raise CheckError(f"vector {decl.name!r} must have one column", decl.line)
            if decl.kind == "scalar" and (rows, cols) != (1, 1):
                raise CheckError(f"scalar {decl.name!r} must be 1x1", decl.line)
            if decl.properties and rows != cols:
                raise CheckError(
                    f"structured operand {decl.name!r} must be square", decl.line)
            if {"UpTri", "LoTri"} <= decl.properties:
                raise CheckError(
                    f"{decl.name!r} cannot be both upper and lower triangular", decl.line)
            self.decls[decl.name] = decl.with_sizes(rows, cols)
            if decl.iotype in ("In", "InOut"):
                self.defined.add(decl.name)
        for decl in self.decls.values():
            if decl.overwrites is None:
                continue
            if decl.overwrites not in self.decls:
                raise CheckError(
                    f"{decl.name!r} overwrites undeclared {decl.overwrites!r}", decl.line)
            target = self.decls[decl.overwrites]
            if (decl.rows, decl.cols) != (target.rows, target.cols):
                raise CheckError(
                    f"{decl.name!r} and overwritten {target.name!r} differ in shape",
                    decl.line)
            if decl.iotype == "In":
                raise CheckError(
                    f"input operand {decl.name!r} cannot overwrite another", decl.line)

    # -- statements ----------------------------------------------------
    def check_stmt(self, stmt: Statement) -> Statement:
        if isinstance(stmt, For):
            return self.check_for(stmt)
        return self.check_assign(stmt)

    def check_for(self, stmt: For) -> For:
        if stmt.var in self.loop_vars:
            raise CheckError(f"loop variable {stmt.var!r} shadows outer loop", stmt.line)
        if stmt.var in self.decls:
            raise CheckError(f"loop variable {stmt.var!r} shadows an operand", stmt.line)
        if stmt.step <= 0:
            raise CheckError("loop step must be positive", stmt.line)
        lo = stmt.lo.subst(self.bindings)
        hi = stmt.hi.subst(self.bindings)
        for bound in (lo, hi):
            if not bound.vars() <= set(self.loop_vars):
                bad = sorted(bound.vars() - set(self.loop_vars))[0]
                raise CheckError(f"unbound size symbol {bad!r} in loop bound", stmt.line)
        self.loop_vars.append(stmt.var)
        body = [self.check_stmt(s) for s in stmt.body]
        self.loop_vars.pop()
        return For(stmt.var, lo, hi, stmt.step, body, stmt.line)

    def check_assign(self, stmt: Assign) -> Assign:
        lhs = _subst_expr(stmt.lhs, self.bindings)
        rhs = _subst_expr(stmt.rhs, self.bindings)
        out = Assign(lhs, rhs, stmt.line)
        cls = classify(out, self.decls_or_fail(out))
        self.classes[id(out)] = cls

        lshape = self.shape(lhs, stmt.line)
        rshape = self.shape(rhs, stmt.line)
        if lshape != rshape:
            raise CheckError(
                f"dimension mismatch: left side is {lshape[0]}x{lshape[1]}, "
                f"right side is {rshape[0]}x{rshape[1]}", stmt.line)

        if cls is StatementClass.HLAC:
            self.check_hlac_dataflow(out)
        else:
            self.check_explicit_dataflow(out)
        return out

    def decls_or_fail(self, stmt: Assign) -> dict[str, OperandDecl]:
        for name in operands_of(stmt.lhs) + operands_of(stmt.rhs):
            if name in self.decls:
                continue
            if name in self.loop_vars:
                raise CheckError(
                    f"loop variable {name!r} used as an operand", stmt.line)
            raise CheckError(f"undeclared operand {name!r}", stmt.line)
        return self.decls

    def check_explicit_dataflow(self, stmt: Assign) -> None:
        target = stmt.lhs
        assert isinstance(target, (OperandRef, RegionRef))
        decl = self.decls[target.name]
        if decl.iotype == "In":
            raise CheckError(f"cannot assign to input operand {decl.name!r}", stmt.line)
        for name in operands_of(stmt.rhs):
            if name not in self.defined and name != target.name:
                raise CheckError(f"operand {name!r} used before it is defined", stmt.line)
        self.defined.add(target.name)

    def check_hlac_dataflow(self, stmt: Assign) -> None:
        """Identify the unknowns an implicit equation solves for."""
        unknown: set[str] = set()
        for name in operands_of(stmt.lhs) + operands_of(stmt.rhs):
            if name in self.defined:
                continue
            decl = self.decls[name]
            if decl.iotype == "In":
                raise CheckError(
                    f"operand {name!r} used before it is defined", stmt.line)
            unknown.add(name)
        if not unknown:
            raise CheckError("equation has no unknown operand", stmt.line)
        self.unknowns[id(stmt)] = frozenset(unknown)
        self.defined |= unknown

    # -- shapes --------------------------------------------------------
    def shape(self, expr: Expr, line: int) -> tuple[int, int]:
        if isinstance(expr, OperandRef):
            d = self.decls[expr.name]
            return (d.rows, d.cols)
        if isinstance(expr, RegionRef):
            return self.region_shape(expr, line)
        if isinstance(expr, Literal):
            return (1, 1)
        if isinstance(expr, (Add, Sub)):
            ls = self.shape(expr.left, line)
            rs = self.shape(expr.right, line)
            if ls != rs:
                raise CheckError(
                    f"dimension mismatch: cannot add {ls[0]}x{ls[1]} "
                    f"and {rs[0]}x{rs[1]}", line)
            return ls
        if isinstance(expr, Mul):
            ls = self.shape(expr.left, line)
            rs = self.shape(expr.right, line)
            if ls == (1, 1):
                return rs
            if rs == (1, 1):
                return ls
            if ls[1] != rs[0]:
                raise CheckError(
                    f"dimension mismatch: cannot multiply {ls[0]}x{ls[1]} "
                    f"by {rs[0]}x{rs[1]}", line)
            return (ls[0], rs[1])
        if isinstance(expr, Div):
            rs = self.shape(expr.right, line)
            if rs != (1, 1):
                raise CheckError("division requires a scalar divisor", line)
            return self.shape(expr.left, line)
        if isinstance(expr, Transpose):
            r, c = self.shape(expr.child, line)
            return (c, r)
        if isinstance(expr, Neg):
            return self.shape(expr.child, line)
        if isinstance(expr, Sqrt):
            if self.shape(expr.child, line) != (1, 1):
                raise CheckError("sqrt requires a scalar argument", line)
            return (1, 1)
        if isinstance(expr, Inverse):
            r, c = self.shape(expr.child, line)
            if r != c:
                raise CheckError(f"cannot invert non-square {r}x{c} operand", line)
            return (r, c)
        raise CheckError(f"cannot infer shape of {expr!r}", line)

    def region_shape(self, ref: RegionRef, line: int) -> tuple[int, int]:
        d = self.decls[ref.name]
        for aff in (ref.row_off, ref.col_off, ref.rows, ref.cols):
            if not aff.vars() <= set(self.loop_vars):
                bad = sorted(aff.vars() - set(self.loop_vars))[0]
                raise CheckError(f"unbound size symbol {bad!r} in index", line)
        for ext in (ref.rows, ref.cols):
            if not ext.is_const:
                raise CheckError(
                    f"region extent {ext} of {ref.name!r} depends on a loop variable",
                    line)
        rows, cols = ref.rows.as_int(), ref.cols.as_int()
        if rows <= 0 or cols <= 0:
            raise CheckError(f"empty region of {ref.name!r}", line)
        # Bounds are only fully checkable when the offsets are constant.
        if ref.row_off.is_const and ref.row_off.as_int() + rows > d.rows:
            raise CheckError(f"row range exceeds {ref.name!r} ({d.rows} rows)", line)
        if ref.col_off.is_const and ref.col_off.as_int() + cols > d.cols:
            raise CheckError(f"column range exceeds {ref.name!r} ({d.cols} columns)", line)
        return (rows, cols)


def check(prog: Program, bindings: Mapping[str, int] | None = None) -> CheckedProgram:
    """Check a parsed program with the given size-symbol bindings."""
    return _Checker(prog, bindings or {}).run()
