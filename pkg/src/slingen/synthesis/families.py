"""Recognition of supported HLAC families.

An HLAC statement is matched against a fixed set of equation shapes:
Cholesky factorizations, triangular solves (either side, optional
transpose, matrix or vector right-hand side), triangular inversion, and
the triangular Sylvester and Lyapunov equations.  Anything else raises
UnsupportedHLAC with a diagnostic naming the statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..frontend.astnodes import (
    Add,
    Assign,
    Expr,
    Inverse,
    Mul,
    OperandDecl,
    OperandRef,
    Transpose,
)
from ..frontend.pretty import pretty_expr


class UnsupportedHLAC(Exception):
    def __init__(self, stmt: Assign, why: str):
        super().__init__(
            f"unsupported HLAC '{pretty_expr(stmt.lhs)} = {pretty_expr(stmt.rhs)}'"
            f" (line {stmt.line}): {why}")
        self.stmt = stmt


@dataclass(frozen=True)
class Family:
    """A recognized HLAC instance.

    kind: chol | solve | trtri | trsyl | trlya.
    uplo: triangularity of the factor operand ("lower"/"upper").
    trans/side apply to solves only.  roles maps role names (out, rhs,
    tri, l, u) to operand names of the enclosing program.
    """

    kind: str
    uplo: str
    roles: tuple[tuple[str, str], ...]
    trans: bool = False
    side: str = "left"
    vector_rhs: bool = False
    unit_diag: bool = False

    def role(self, name: str) -> str:
        return dict(self.roles)[name]

    @property
    def signature(self) -> tuple:
        """Size-agnostic key for the algorithm database."""
        return (self.kind, self.uplo, self.trans, self.side,
                self.vector_rhs, self.unit_diag)


def _ref(e: Expr) -> Optional[str]:
    return e.name if isinstance(e, OperandRef) else None


def _tref(e: Expr) -> Optional[tuple[str, bool]]:
    """Operand name and transpose flag of a possibly transposed reference."""
    if isinstance(e, OperandRef):
        return (e.name, False)
    if isinstance(e, Transpose) and isinstance(e.child, OperandRef):
        return (e.child.name, True)
    return None


def _uplo(decl: OperandDecl) -> Optional[str]:
    if "LoTri" in decl.properties:
        return "lower"
    if "UpTri" in decl.properties:
        return "upper"
    return None


def detect_family(stmt: Assign, decls: Mapping[str, OperandDecl],
                  unknowns: frozenset[str]) -> Family:
    lhs, rhs = stmt.lhs, stmt.rhs

    # X = inv(L)
    if isinstance(rhs, Inverse):
        out = _ref(lhs)
        src = _ref(rhs.child)
        if out is None or src is None:
            raise UnsupportedHLAC(stmt, "inversion must be of the form X = inv(L)")
        uplo = _uplo(decls[src])
        if uplo is None:
            raise UnsupportedHLAC(stmt, f"inverted operand {src!r} is not triangular")
        if _uplo(decls[out]) != uplo:
            raise UnsupportedHLAC(
                stmt, f"output {out!r} must share the triangularity of {src!r}")
        return Family("trtri", uplo, (("out", out), ("tri", src)),
                      unit_diag="UnitDiag" in decls[src].properties)

    rhs_name = _ref(rhs)
    if rhs_name is None:
        raise UnsupportedHLAC(stmt, "right-hand side must be a single operand")

    # L*X + X*U = C  /  L*X + X*L' = S
    if isinstance(lhs, Add):
        a = _mul_parts(lhs.left)
        b = _mul_parts(lhs.right)
        if a is None or b is None:
            raise UnsupportedHLAC(stmt, "sum left-hand side must be L*X + X*U")
        (la, ta), (xa, txa) = a
        (xb, txb), (ub, tb) = b
        if xa != xb or txa or txb or xa not in unknowns:
            raise UnsupportedHLAC(stmt, "could not identify the unknown of L*X + X*U")
        if _uplo(decls[la]) != ("upper" if ta else "lower"):
            raise UnsupportedHLAC(stmt, f"{la!r} must act as a lower-triangular factor")
        eff_u = ("lower" if _uplo(decls[ub]) == "upper" else "upper") if tb \
            else _uplo(decls[ub])
        if eff_u != "upper":
            raise UnsupportedHLAC(stmt, f"{ub!r} must act as an upper-triangular factor")
        if la == ub and tb and not ta:
            if not decls[xa].is_symmetric:
                raise UnsupportedHLAC(stmt, "Lyapunov unknown must be symmetric")
            return Family("trlya", "lower",
                          (("out", xa), ("l", la), ("rhs", rhs_name)))
        if ta or tb:
            raise UnsupportedHLAC(stmt, "transposed Sylvester factors are unsupported")
        return Family("trsyl", "lower",
                      (("out", xa), ("l", la), ("u", ub), ("rhs", rhs_name)))

    parts = _mul_parts(lhs)
    if parts is None:
        raise UnsupportedHLAC(stmt, "left-hand side is not a recognized equation form")
    (a, ta), (b, tb) = parts

    # U'*U = S or L*L' = K
    if a == b and a in unknowns:
        uplo = _uplo(decls[a])
        if uplo == "upper" and ta and not tb:
            pass
        elif uplo == "lower" and tb and not ta:
            pass
        else:
            raise UnsupportedHLAC(
                stmt, "factorization must be U'*U = S (upper) or L*L' = K (lower)")
        return Family("chol", uplo, (("out", a), ("rhs", rhs_name)))

    # triangular solves
    if b in unknowns and a not in unknowns:
        tri, trans, out, tout, side = a, ta, b, tb, "left"
    elif a in unknowns and b not in unknowns:
        out, tout, tri, trans, side = a, ta, b, tb, "right"
    else:
        raise UnsupportedHLAC(stmt, "could not identify the unknown operand")
    if tout:
        raise UnsupportedHLAC(stmt, "solve unknown must appear untransposed")
    uplo = _uplo(decls[tri])
    if uplo is None:
        raise UnsupportedHLAC(stmt, f"solve coefficient {tri!r} is not triangular")
    vec = decls[out].kind == "vector"
    if vec and side == "right":
        raise UnsupportedHLAC(stmt, "right-side solve needs a matrix unknown")
    return Family("solve", uplo, (("out", out), ("tri", tri), ("rhs", rhs_name)),
                  trans=trans, side=side, vector_rhs=vec,
                  unit_diag="UnitDiag" in decls[tri].properties)


def _mul_parts(e: Expr) -> Optional[tuple[tuple[str, bool], tuple[str, bool]]]:
    if not isinstance(e, Mul):
        return None
    left = _tref(e.left)
    right = _tref(e.right)
    if left is None or right is None:
        return None
    return (left, right)
