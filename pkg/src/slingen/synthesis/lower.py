"""Lowering of checked programs: HLACs become blocked basic programs.

Every HLAC statement is replaced by the concrete statement sequence of a
chosen blocked algorithm; sBLACs and scalar ops pass through with whole
operand references normalized to regions.  Source-level loops are
unrolled here (all bounds are compile-time constants after checking).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

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
    Sqrt,
    Statement,
    StatementClass,
    Sub,
    Transpose,
    Neg,
    Inverse,
)
from ..affine import Aff
from . import algorithms as alg
from .basic import BasicProgram, Emitter, R, whole
from .database import AlgorithmDB
from .families import Family, detect_family
from .invariants import LoopInvariant, enumerate_invariants
from .pme import PME, SynthesisError, generate_pme

NU = 4

# Per-iteration body shape of each blocked algorithm, for structural tests
# and debug dumps (steady-state iteration; boundary iterations skip steps).
ALGORITHM_STEPS: dict[tuple[str, int], tuple[str, ...]] = {
    ("chol", 0): ("blocked-solve", "matmul-update", "chol-codelet"),
    ("chol", 1): ("matmul-update", "chol-codelet",
                  "matmul-update", "solve-codelet"),
    ("chol", 2): ("chol-codelet", "solve-codelet", "matmul-update"),
    ("solve", 0): ("copy", "matmul-update", "solve-codelet"),
    ("trtri", 0): ("trtri-codelet", "matmul-update", "matmul-scale"),
    ("trtri", 1): ("trtri-codelet", "matmul-update", "solve-codelet"),
    ("trsyl", 0): ("copy", "matmul-update", "matmul-update", "trsyl-codelet"),
    ("trsyl", 1): ("copy", "matmul-update", "matmul-update", "trsyl-codelet"),
    ("trsyl", 2): ("copy", "matmul-update", "matmul-update", "trsyl-codelet"),
    ("trsyl", 3): ("copy", "matmul-update", "matmul-update", "trsyl-codelet"),
    ("trlya", 0): ("copy", "matmul-update", "trlya-codelet"),
    ("trlya", 1): ("copy", "matmul-update", "trlya-codelet"),
}


@dataclass(frozen=True)
class Algorithm:
    """A loop algorithm realizing one invariant at one block size."""

    family: Family
    invariant: LoopInvariant
    blocksize: int

    @property
    def variant(self) -> int:
        return self.invariant.index

    @property
    def steps(self) -> tuple[str, ...]:
        return ALGORITHM_STEPS[(self.family.kind, self.variant)]


def default_scheme(family: Family) -> str:
    if family.kind != "solve":
        return "2x2"
    if family.vector_rhs or family.side == "right":
        return "2x1"
    return "1x2"


def family_invariants(family: Family) -> list[LoopInvariant]:
    return enumerate_invariants(generate_pme(family, default_scheme(family)))


def build_algorithm(inv: LoopInvariant, blocksize: int) -> Algorithm:
    if blocksize <= 0:
        raise SynthesisError("blocksize must be positive")
    return Algorithm(inv.pme.family, inv, blocksize)


def _subst_region(e: Expr, env: Mapping[str, int]) -> Expr:
    if isinstance(e, RegionRef):
        return RegionRef(e.name, e.row_off.subst(env), e.col_off.subst(env),
                         e.rows.subst(env), e.cols.subst(env))
    if isinstance(e, (OperandRef, Literal)):
        return e
    kids = tuple(_subst_region(c, env) for c in e.children())
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(kids[0], kids[1])
    return type(e)(kids[0])


def flatten_stmts(stmts: Sequence[Statement],
                  env: Optional[dict[str, int]] = None) -> list[Assign]:
    """Unroll all loops, substituting induction variables."""
    env = dict(env or {})
    out: list[Assign] = []
    for s in stmts:
        if isinstance(s, For):
            lo = s.lo.eval(env)
            hi = s.hi.eval(env)
            for v in range(lo, hi, s.step):
                out.extend(flatten_stmts(s.body, {**env, s.var: v}))
        else:
            out.append(Assign(_subst_region(s.lhs, env),
                              _subst_region(s.rhs, env), s.line))
    return out


def _regionize(e: Expr, decls) -> Expr:
    if isinstance(e, OperandRef):
        d = decls[e.name]
        return RegionRef(e.name, Aff(0), Aff(0), Aff(d.rows), Aff(d.cols))
    if isinstance(e, (RegionRef, Literal)):
        return e
    kids = tuple(_regionize(c, decls) for c in e.children())
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(kids[0], kids[1])
    return type(e)(kids[0])


def _region_of(name: str, decls) -> R:
    return whole(decls[name])


def emit_hlac(em: Emitter, db: AlgorithmDB, fam: Family, decls,
              variant: int, b: int) -> None:
    role = fam.role
    if fam.kind == "chol":
        alg.build_chol(em, db, fam, _region_of(role("rhs"), decls),
                       _region_of(role("out"), decls), variant, b)
    elif fam.kind == "solve":
        alg.build_solve(em, db, fam, _region_of(role("tri"), decls),
                        _region_of(role("rhs"), decls),
                        _region_of(role("out"), decls), b)
    elif fam.kind == "trtri":
        alg.build_trtri(em, db, fam, _region_of(role("tri"), decls),
                        _region_of(role("out"), decls), variant, b)
    elif fam.kind == "trsyl":
        alg.build_trsyl(em, db, fam, _region_of(role("l"), decls),
                        _region_of(role("u"), decls),
                        _region_of(role("rhs"), decls),
                        _region_of(role("out"), decls), variant, b)
    elif fam.kind == "trlya":
        alg.build_trlya(em, db, fam, _region_of(role("l"), decls),
                        _region_of(role("rhs"), decls),
                        _region_of(role("out"), decls), variant, b)
    else:
        raise SynthesisError(f"no builder for family {fam.kind!r}")


def program_hlacs(cp: CheckedProgram) -> list[tuple[Assign, Family]]:
    """HLAC statements of a program in order, with recognized families."""
    out = []
    for a in cp.assigns():
        if cp.class_of(a) is StatementClass.HLAC:
            fam = detect_family(a, cp.decls, cp.unknowns[id(a)])
            out.append((a, fam))
    return out


def lower(cp: CheckedProgram,
          choices: Optional[Sequence[int]] = None,
          blocksize: int = NU,
          db: Optional[AlgorithmDB] = None) -> BasicProgram:
    """Replace every HLAC with a blocked algorithm instance.

    choices gives the invariant index per HLAC occurrence in statement
    order (default: first invariant for each).
    """
    db = db or AlgorithmDB()
    em = Emitter(set(cp.decls))
    hlac_index = 0
    choices = list(choices or [])

    def visit(stmts: Sequence[Statement]) -> None:
        nonlocal hlac_index
        for stmt in stmts:
            if isinstance(stmt, For):
                for body_stmt in flatten_stmts([stmt]):
                    if _is_hlac_shape(body_stmt):
                        raise SynthesisError(
                            f"HLAC inside a loop is unsupported "
                            f"(line {body_stmt.line})")
                    em.emit(_regionize(body_stmt.lhs, cp.decls),
                            _regionize(body_stmt.rhs, cp.decls))
                continue
            if cp.class_of(stmt) is StatementClass.HLAC:
                fam = detect_family(stmt, cp.decls, cp.unknowns[id(stmt)])
                invs = family_invariants(fam)
                want = choices[hlac_index] if hlac_index < len(choices) else 0
                if not 0 <= want < len(invs):
                    raise SynthesisError(
                        f"invariant index {want} out of range for {fam.kind}"
                        f" ({len(invs)} available)")
                emit_hlac(em, db, fam, cp.decls, invs[want].index, blocksize)
                hlac_index += 1
            else:
                em.emit(_regionize(stmt.lhs, cp.decls),
                        _regionize(stmt.rhs, cp.decls))

    visit(cp.stmts)
    decls = dict(cp.decls)
    for d in em.temp_decls:
        decls[d.name] = d
    return BasicProgram(decls, em.stmts, cp.name)


def _is_hlac_shape(stmt: Assign) -> bool:
    if not isinstance(stmt.lhs, (OperandRef, RegionRef)):
        return True
    return any(isinstance(n, Inverse) for n in stmt.rhs.walk())
