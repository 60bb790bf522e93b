"""Numpy evaluation of expressions and flat basic programs.

Used to validate lowered programs directly against the reference,
before any tiling or code generation has happened.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..frontend.astnodes import (
    Add,
    Assign,
    Div,
    Expr,
    Literal,
    Mul,
    Neg,
    OperandDecl,
    OperandRef,
    RegionRef,
    Sqrt,
    Sub,
    Transpose,
)


def _region(e: RegionRef, vals: Mapping[str, np.ndarray]) -> np.ndarray:
    r0, c0 = e.row_off.eval({}), e.col_off.eval({})
    rows, cols = e.rows.eval({}), e.cols.eval({})
    return vals[e.name][r0:r0 + rows, c0:c0 + cols]


def eval_expr(e: Expr, vals: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate an expression to a 2-d array.

    Mul of a 1x1 operand scales elementwise; otherwise it is a matrix
    product.  Div requires a 1x1 divisor.
    """
    if isinstance(e, OperandRef):
        return vals[e.name]
    if isinstance(e, RegionRef):
        return _region(e, vals)
    if isinstance(e, Literal):
        return np.array([[float(e.value)]])
    if isinstance(e, Add):
        return eval_expr(e.left, vals) + eval_expr(e.right, vals)
    if isinstance(e, Sub):
        return eval_expr(e.left, vals) - eval_expr(e.right, vals)
    if isinstance(e, Mul):
        a, b = eval_expr(e.left, vals), eval_expr(e.right, vals)
        if a.shape == (1, 1) or b.shape == (1, 1):
            return a * b
        return a @ b
    if isinstance(e, Div):
        a, b = eval_expr(e.left, vals), eval_expr(e.right, vals)
        assert b.shape == (1, 1)
        return a / b[0, 0]
    if isinstance(e, Transpose):
        return eval_expr(e.child, vals).T
    if isinstance(e, Neg):
        return -eval_expr(e.child, vals)
    if isinstance(e, Sqrt):
        return np.sqrt(eval_expr(e.child, vals))
    raise TypeError(f"cannot evaluate {type(e).__name__}")


def init_values(decls: Mapping[str, OperandDecl],
                inputs: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Working set: inputs copied in, everything else zero-initialized."""
    vals: dict[str, np.ndarray] = {}
    for d in decls.values():
        if d.name in inputs:
            vals[d.name] = np.array(inputs[d.name], dtype=float, copy=True)
        else:
            vals[d.name] = np.zeros((d.rows, d.cols))
    return vals


def evaluate_basic(bp, inputs: Mapping[str, np.ndarray],
                   ) -> dict[str, np.ndarray]:
    """Execute a flat basic program statement by statement."""
    vals = init_values(bp.decls, inputs)
    for s in bp.stmts:
        _store(s, vals)
    return vals


def _store(s: Assign, vals: dict[str, np.ndarray]) -> None:
    v = eval_expr(s.rhs, vals)
    lhs = s.lhs
    if isinstance(lhs, OperandRef):
        vals[lhs.name][:, :] = v
        return
    assert isinstance(lhs, RegionRef)
    r0, c0 = lhs.row_off.eval({}), lhs.col_off.eval({})
    rows, cols = lhs.rows.eval({}), lhs.cols.eval({})
    vals[lhs.name][r0:r0 + rows, c0:c0 + cols] = v


def within_tolerance(got: np.ndarray, want: np.ndarray, rel: float = 1e-10,
                     absolute: float = 1e-10, floor: float = 1e-8) -> bool:
    """Elementwise check: relative above the magnitude floor, absolute below."""
    got = np.asarray(got)
    want = np.asarray(want)
    err = np.abs(got - want)
    big = np.abs(want) > floor
    ok = np.where(big, err <= rel * np.abs(want), err <= absolute)
    return bool(np.all(ok))


def rel_error(got: np.ndarray, want: np.ndarray) -> float:
    scale = np.linalg.norm(want)
    if scale == 0.0:
        return float(np.linalg.norm(got - want))
    return float(np.linalg.norm(got - want) / scale)
