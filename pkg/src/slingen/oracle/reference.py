"""Reference execution of checked programs.

sBLAC and scalar statements are evaluated directly with numpy; each
higher-level equation is solved with an independent dense method
(library Cholesky/inverse/solve, or an explicit Kronecker system for
the Sylvester-type equations).
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..frontend.astnodes import (
    Add,
    Assign,
    CheckedProgram,
    Div,
    Expr,
    For,
    Literal,
    Mul,
    OperandRef,
    RegionRef,
    Statement,
    StatementClass,
    Sub,
)
from ..synthesis.families import Family, detect_family
from .evaluate import eval_expr, rel_error


def _subst(e: Expr, env: Mapping[str, int]) -> Expr:
    if isinstance(e, RegionRef):
        return RegionRef(e.name, e.row_off.subst(env), e.col_off.subst(env),
                         e.rows.subst(env), e.cols.subst(env))
    if isinstance(e, (OperandRef, Literal)):
        return e
    kids = tuple(_subst(c, env) for c in e.children())
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(kids[0], kids[1])
    return type(e)(kids[0])


class OracleError(ValueError):
    pass


def cholesky_lower(s: np.ndarray) -> np.ndarray:
    """Textbook scalar Cholesky: L L' = s with L lower triangular."""
    n = s.shape[0]
    low = np.zeros_like(s)
    for j in range(n):
        d = s[j, j] - low[j, :j] @ low[j, :j]
        if d <= 0.0:
            raise OracleError("matrix is not positive definite")
        low[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (s[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def trisolve(m: np.ndarray, b: np.ndarray, lower: bool) -> np.ndarray:
    """Row substitution for m x = b with m triangular (read one half)."""
    n = m.shape[0]
    if np.any(np.diag(m) == 0.0):
        raise OracleError("singular triangular matrix")
    x = np.zeros((n, b.shape[1]))
    order = range(n) if lower else range(n - 1, -1, -1)
    for i in order:
        acc = m[i, :i] @ x[:i] if lower else m[i, i + 1:] @ x[i + 1:]
        x[i] = (b[i] - acc) / m[i, i]
    return x


def tri_inverse(m: np.ndarray, lower: bool) -> np.ndarray:
    """Column-by-column substitution against the identity."""
    return trisolve(m, np.eye(m.shape[0]), lower)


def trsyl_kron(low: np.ndarray, up: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Sylvester L X + X U = C via the dense Kronecker system."""
    n, m = c.shape
    sys = np.kron(low, np.eye(m)) + np.kron(np.eye(n), up.T)
    return np.linalg.solve(sys, c.reshape(-1)).reshape(n, m)


def trsyl_subst(low: np.ndarray, up: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Sylvester by elementwise forward substitution (cross-check)."""
    n, m = c.shape
    x = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = low[i, :i] @ x[:i, j] + x[i, :j] @ up[:j, j]
            x[i, j] = (c[i, j] - acc) / (low[i, i] + up[j, j])
    return x


def _solve_hlac(fam: Family, vals: Mapping[str, np.ndarray]) -> np.ndarray:
    role = fam.role
    if fam.kind == "chol":
        low = cholesky_lower(vals[role("rhs")])
        return low.T if fam.uplo == "upper" else low
    if fam.kind == "trtri":
        return tri_inverse(vals[role("tri")], fam.uplo == "lower")
    if fam.kind == "solve":
        a = vals[role("tri")]
        m = a.T if fam.trans else a
        lower = (fam.uplo == "lower") != fam.trans
        b = vals[role("rhs")]
        if fam.side == "left":
            return trisolve(m, b, lower)
        # X A = B  <=>  A' X' = B'
        return trisolve(m.T, b.T, not lower).T
    if fam.kind == "trsyl":
        return trsyl_kron(vals[role("l")], vals[role("u")], vals[role("rhs")])
    if fam.kind == "trlya":
        low, s = vals[role("l")], vals[role("rhs")]
        x = trsyl_kron(low, low.T, s)
        return (x + x.T) / 2.0
    raise ValueError(f"no reference solver for {fam.kind!r}")


def reference_outputs(cp: CheckedProgram,
                      inputs: Mapping[str, np.ndarray],
                      ) -> dict[str, np.ndarray]:
    """Run the program; returns final values of every operand."""
    vals = {k: np.array(v, dtype=float, copy=True) for k, v in inputs.items()}

    def run(stmts: Sequence[Statement], env: dict[str, int]) -> None:
        for s in stmts:
            if isinstance(s, For):
                lo, hi = s.lo.eval(env), s.hi.eval(env)
                for v in range(lo, hi, s.step):
                    run(s.body, {**env, s.var: v})
                continue
            if cp.class_of(s) is StatementClass.HLAC:
                fam = detect_family(s, cp.decls, cp.unknowns[id(s)])
                vals[fam.role("out")] = _solve_hlac(fam, vals)
                continue
            rhs = eval_expr(_subst(s.rhs, env), vals)
            lhs = _subst(s.lhs, env)
            if isinstance(lhs, OperandRef):
                vals[lhs.name] = np.array(rhs, dtype=float, copy=True)
            else:
                assert isinstance(lhs, RegionRef)
                r0, c0 = lhs.row_off.eval({}), lhs.col_off.eval({})
                rr, cc = lhs.rows.eval({}), lhs.cols.eval({})
                vals[lhs.name][r0:r0 + rr, c0:c0 + cc] = rhs

    run(cp.stmts, {})
    return vals


def output_names(cp: CheckedProgram) -> list[str]:
    return [d.name for d in cp.decls.values() if d.iotype in ("Out", "InOut")]


def residuals(cp: CheckedProgram,
              vals: Mapping[str, np.ndarray]) -> dict[int, float]:
    """Relative defining-equation residual of every higher-level statement.

    vals must hold values for every operand each equation mentions
    (e.g. the final values computed by generated code).
    """
    out: dict[int, float] = {}
    for s in cp.assigns():
        if cp.class_of(s) is not StatementClass.HLAC:
            continue
        fam = detect_family(s, cp.decls, cp.unknowns[id(s)])
        role = fam.role
        x = vals[role("out")]
        if fam.kind == "chol":
            got = x.T @ x if fam.uplo == "upper" else x @ x.T
            want = np.asarray(vals[role("rhs")])
        elif fam.kind == "trtri":
            got = np.asarray(vals[role("tri")]) @ x
            want = np.eye(x.shape[0])
        elif fam.kind == "solve":
            a = np.asarray(vals[role("tri")])
            m = a.T if fam.trans else a
            got = m @ x if fam.side == "left" else x @ m
            want = np.asarray(vals[role("rhs")])
        elif fam.kind == "trsyl":
            low, up = vals[role("l")], vals[role("u")]
            got = low @ x + x @ up
            want = np.asarray(vals[role("rhs")])
        else:  # trlya
            low = np.asarray(vals[role("l")])
            got = low @ x + x @ low.T
            want = np.asarray(vals[role("rhs")])
        out[s.line] = rel_error(got, want)
    return out
