"""Blocked algorithm construction for the supported HLAC families.

Each (family, invariant) pair has a builder that emits fully concrete
statements: block-level sBLAC updates over regions, plus scalar codelets
for the vector-size recursive instances (the blocksize-1 algorithm,
unrolled by construction).  All builders write the factor/solution
operand and keep right-hand sides intact, staging updates in workspace
temporaries.
"""

from __future__ import annotations

from ..frontend.astnodes import (
    Add, Div, Expr, Literal, Mul, Neg, Sqrt, Sub, Transpose)
from .basic import Emitter, R, blocks
from .database import AlgorithmDB
from .families import Family
from .pme import SynthesisError


def _mm(a: Expr, b: Expr) -> Expr:
    return Mul(a, b)


def _t(a: Expr) -> Expr:
    return Transpose(a)


def _acc_sub(em: Emitter, t: R, term: Expr) -> None:
    em.emit(t.ref, Sub(t.ref, term))


# -- Cholesky ----------------------------------------------------------

def chol_codelet(em: Emitter, db: AlgorithmDB, T: R, U: R, uplo: str) -> None:
    """Blocksize-1 Cholesky on writable workspace T, factor into U."""
    db.note(("codelet", "chol", uplo))
    n = T.rows
    if uplo == "upper":
        for i in range(n):
            if i > 0:
                # fused diagonal+row update: T(i,i:) -= U(0:i,i)' U(0:i,i:)
                row = T.sub(i, i, 1, n - i)
                _acc_sub(em, row, _mm(_t(U.col(i, 0, i).ref),
                                      U.sub(0, i, i, n - i).ref))
            em.emit(U.at(i, i).ref, Sqrt(T.at(i, i).ref))
            for j in range(i + 1, n):
                em.emit(U.at(i, j).ref, Div(T.at(i, j).ref, U.at(i, i).ref))
    else:
        for j in range(n):
            if j > 0:
                col = T.sub(j, j, n - j, 1)
                _acc_sub(em, col, _mm(U.sub(j, 0, n - j, j).ref,
                                      _t(U.row(j, 0, j).ref)))
            em.emit(U.at(j, j).ref, Sqrt(T.at(j, j).ref))
            for i in range(j + 1, n):
                em.emit(U.at(i, j).ref, Div(T.at(i, j).ref, U.at(j, j).ref))


def build_chol(em: Emitter, db: AlgorithmDB, fam: Family, S: R, U: R,
               variant: int, b: int) -> None:
    db.note(("algorithm", "chol", fam.uplo, variant))
    n = S.rows
    T = em.temp(n, n, "w")
    em.emit(T.ref, S.ref)
    if fam.uplo == "upper":
        _chol_upper(em, db, fam, T, U, variant, b)
    else:
        _chol_lower(em, db, fam, T, U, variant, b)


def _chol_upper(em, db, fam, T: R, U: R, variant: int, b: int) -> None:
    n = T.rows
    for k, bk in blocks(n, b):
        diag_T = T.sub(k, k, bk, bk)
        diag_U = U.sub(k, k, bk, bk)
        above = U.sub(0, k, k, bk)  # U(0:k, k:k+bk)
        rest = n - k - bk
        if variant == 0:  # bordered: new column by big solve, then diag
            if k > 0:
                solve_fam = Family("solve", "upper", (("out", "X"),),
                                   trans=True, side="left")
                build_solve(em, db, solve_fam, U.sub(0, 0, k, k),
                            T.sub(0, k, k, bk), above, b)
                _acc_sub(em, diag_T, _mm(_t(above.ref), above.ref))
            chol_codelet(em, db, diag_T, diag_U, "upper")
        elif variant == 1:  # left-looking: row block per iteration
            if k > 0:
                _acc_sub(em, diag_T, _mm(_t(above.ref), above.ref))
            chol_codelet(em, db, diag_T, diag_U, "upper")
            if rest > 0:
                row_T = T.sub(k, k + bk, bk, rest)
                if k > 0:
                    _acc_sub(em, row_T, _mm(_t(above.ref),
                                            U.sub(0, k + bk, k, rest).ref))
                solve_codelet(em, db, diag_U, "upper", True, False,
                              row_T, U.sub(k, k + bk, bk, rest))
        else:  # right-looking: trailing update per iteration
            chol_codelet(em, db, diag_T, diag_U, "upper")
            if rest > 0:
                row_T = T.sub(k, k + bk, bk, rest)
                row_U = U.sub(k, k + bk, bk, rest)
                solve_codelet(em, db, diag_U, "upper", True, False,
                              row_T, row_U)
                _acc_sub(em, T.sub(k + bk, k + bk, rest, rest),
                         _mm(_t(row_U.ref), row_U.ref))


def _chol_lower(em, db, fam, T: R, U: R, variant: int, b: int) -> None:
    n = T.rows
    for k, bk in blocks(n, b):
        diag_T = T.sub(k, k, bk, bk)
        diag_U = U.sub(k, k, bk, bk)
        left = U.sub(k, 0, bk, k)  # L(k:k+bk, 0:k)
        rest = n - k - bk
        if variant == 0:  # bordered
            if k > 0:
                solve_fam = Family("solve", "lower", (("out", "X"),),
                                   side="right", trans=True)
                build_solve(em, db, solve_fam, U.sub(0, 0, k, k),
                            T.sub(k, 0, bk, k), left, b)
                _acc_sub(em, diag_T, _mm(left.ref, _t(left.ref)))
            chol_codelet(em, db, diag_T, diag_U, "lower")
        elif variant == 1:  # left-looking
            if k > 0:
                _acc_sub(em, diag_T, _mm(left.ref, _t(left.ref)))
            chol_codelet(em, db, diag_T, diag_U, "lower")
            if rest > 0:
                col_T = T.sub(k + bk, k, rest, bk)
                if k > 0:
                    _acc_sub(em, col_T, _mm(U.sub(k + bk, 0, rest, k).ref,
                                            _t(left.ref)))
                solve_codelet(em, db, diag_U, "lower", True, True,
                              col_T, U.sub(k + bk, k, rest, bk))
        else:  # right-looking
            chol_codelet(em, db, diag_T, diag_U, "lower")
            if rest > 0:
                col_T = T.sub(k + bk, k, rest, bk)
                col_U = U.sub(k + bk, k, rest, bk)
                solve_codelet(em, db, diag_U, "lower", True, True,
                              col_T, col_U)
                _acc_sub(em, T.sub(k + bk, k + bk, rest, rest),
                         _mm(col_U.ref, _t(col_U.ref)))


# -- triangular solves --------------------------------------------------

def solve_codelet(em: Emitter, db: AlgorithmDB, tri: R, uplo: str,
                  trans: bool, right: bool, t: R, X: R,
                  unit: bool = False) -> None:
    """Substitution on a writable right-hand-side workspace t.

    Left: solves A X = t where A = tri or tri'.  Right: solves X A = t.
    """
    db.note(("codelet", "solve", uplo, trans, right, unit))
    if not right:
        n, m = X.rows, X.cols
        eff_lower = (uplo == "lower") != trans
        order = range(n) if eff_lower else range(n - 1, -1, -1)
        done = 0
        for i in order:
            if eff_lower:
                lo, cnt = 0, i
            else:
                lo, cnt = i + 1, n - 1 - i
            if done and cnt:
                coef = (_t(tri.sub(lo, i, cnt, 1).ref) if trans
                        else tri.sub(i, lo, 1, cnt).ref)
                _acc_sub(em, t.sub(i, 0, 1, m),
                         _mm(coef, X.sub(lo, 0, cnt, m).ref))
            for j in range(m):
                if unit:
                    em.emit(X.at(i, j).ref, t.at(i, j).ref)
                else:
                    em.emit(X.at(i, j).ref,
                            Div(t.at(i, j).ref, tri.at(i, i).ref))
            done += 1
    else:
        n, m = X.rows, X.cols  # X is n x m, A is m x m
        eff_upper = (uplo == "upper") != trans
        order = range(m) if eff_upper else range(m - 1, -1, -1)
        done = 0
        for j in order:
            if eff_upper:
                lo, cnt = 0, j
            else:
                lo, cnt = j + 1, m - 1 - j
            if done and cnt:
                coef = (_t(tri.sub(j, lo, 1, cnt).ref) if trans
                        else tri.sub(lo, j, cnt, 1).ref)
                _acc_sub(em, t.sub(0, j, n, 1),
                         _mm(X.sub(0, lo, n, cnt).ref, coef))
            for i in range(n):
                if unit:
                    em.emit(X.at(i, j).ref, t.at(i, j).ref)
                else:
                    em.emit(X.at(i, j).ref,
                            Div(t.at(i, j).ref, tri.at(j, j).ref))
            done += 1


def build_solve(em: Emitter, db: AlgorithmDB, fam: Family, tri: R, B: R,
                X: R, b: int) -> None:
    """Blocked triangular solve; B is read-only, X is written."""
    db.note(("algorithm", "solve", fam.uplo, fam.trans, fam.side,
             fam.unit_diag))
    right = fam.side == "right"
    trans = fam.trans
    uplo = fam.uplo
    n, m = X.rows, X.cols
    if not right:
        eff_lower = (uplo == "lower") != trans
        row_blocks = blocks(n, b)
        if not eff_lower:
            row_blocks = row_blocks[::-1]
        for j, bj in blocks(m, b):
            prev: list[tuple[int, int]] = []
            for i, bi in row_blocks:
                t = em.temp(bi, bj, "s")
                em.emit(t.ref, B.sub(i, j, bi, bj).ref)
                for k, bk in prev:
                    coef = (_t(tri.sub(k, i, bk, bi).ref) if trans
                            else tri.sub(i, k, bi, bk).ref)
                    _acc_sub(em, t, _mm(coef, X.sub(k, j, bk, bj).ref))
                solve_codelet(em, db, tri.sub(i, i, bi, bi), uplo, trans,
                              False, t, X.sub(i, j, bi, bj), fam.unit_diag)
                prev.append((i, bi))
    else:
        eff_upper = (uplo == "upper") != trans
        col_blocks = blocks(m, b)
        if not eff_upper:
            col_blocks = col_blocks[::-1]
        for i, bi in blocks(n, b):
            prev = []
            for j, bj in col_blocks:
                t = em.temp(bi, bj, "s")
                em.emit(t.ref, B.sub(i, j, bi, bj).ref)
                for k, bk in prev:
                    coef = (_t(tri.sub(j, k, bj, bk).ref) if trans
                            else tri.sub(k, j, bk, bj).ref)
                    _acc_sub(em, t, _mm(X.sub(i, k, bi, bk).ref, coef))
                solve_codelet(em, db, tri.sub(j, j, bj, bj), uplo, trans,
                              True, t, X.sub(i, j, bi, bj), fam.unit_diag)
                prev.append((j, bj))


# -- triangular inversion ------------------------------------------------

def trtri_codelet(em: Emitter, db: AlgorithmDB, L: R, X: R,
                  uplo: str) -> None:
    db.note(("codelet", "trtri", uplo))
    n = L.rows
    if uplo == "lower":
        for j in range(n):
            em.emit(X.at(j, j).ref, Div(Literal(1.0), L.at(j, j).ref))
            for i in range(j + 1, n):
                dot = _mm(L.sub(i, j, 1, i - j).ref, X.sub(j, j, i - j, 1).ref)
                s = em.temp(1, 1, "d")
                em.emit(s.ref, dot)
                em.emit(X.at(i, j).ref, Neg(Div(s.ref, L.at(i, i).ref)))
    else:
        for i in range(n - 1, -1, -1):
            em.emit(X.at(i, i).ref, Div(Literal(1.0), L.at(i, i).ref))
            for j in range(i + 1, n):
                dot = _mm(L.sub(i, i + 1, 1, j - i).ref,
                          X.sub(i + 1, j, j - i, 1).ref)
                s = em.temp(1, 1, "d")
                em.emit(s.ref, dot)
                em.emit(X.at(i, j).ref, Neg(Div(s.ref, L.at(i, i).ref)))


def build_trtri(em: Emitter, db: AlgorithmDB, fam: Family, L: R, X: R,
                variant: int, b: int) -> None:
    db.note(("algorithm", "trtri", fam.uplo, variant))
    n = L.rows
    bl = blocks(n, b)
    if fam.uplo == "upper":
        # mirror of the lower case on reversed block indices
        for (ci, cj) in _trtri_cells(len(bl), variant):
            _trtri_cell_upper(em, db, L, X, bl, ci, cj, variant)
        return
    cells = _trtri_cells(len(bl), variant)
    for (ci, cj) in cells:
        i, bi = bl[ci]
        j, bj = bl[cj]
        if ci == cj:
            trtri_codelet(em, db, L.sub(i, i, bi, bi), X.sub(i, i, bi, bi),
                          "lower")
            continue
        t = em.temp(bi, bj, "a")
        first = True
        for ck in range(cj, ci):
            k, bk = bl[ck]
            term = _mm(L.sub(i, k, bi, bk).ref, X.sub(k, j, bk, bj).ref)
            if first:
                em.emit(t.ref, term)
                first = False
            else:
                em.emit(t.ref, Add(t.ref, term))
        if variant == 0:
            # multiply by the already inverted diagonal block
            em.emit(X.sub(i, j, bi, bj).ref,
                    Neg(_mm(X.sub(i, i, bi, bi).ref, t.ref)))
        else:
            # solve L_ii * X_ij = -t
            em.emit(t.ref, Neg(t.ref))
            solve_codelet(em, db, L.sub(i, i, bi, bi), "lower", False,
                          False, t, X.sub(i, j, bi, bj))


def _trtri_cells(nb: int, variant: int) -> list[tuple[int, int]]:
    if variant == 0:  # row-expanding: diagonal first, then the row
        out = []
        for i in range(nb):
            out.append((i, i))
            for j in range(i):
                out.append((i, j))
        return out
    out = []  # column-major
    for j in range(nb):
        out.append((j, j))
        for i in range(j + 1, nb):
            out.append((i, j))
    return out


def _trtri_cell_upper(em, db, L: R, X: R, bl, ci, cj, variant) -> None:
    nb = len(bl)
    i, bi = bl[nb - 1 - ci]
    j, bj = bl[nb - 1 - cj]
    if ci == cj:
        trtri_codelet(em, db, L.sub(i, i, bi, bi), X.sub(i, i, bi, bi),
                      "upper")
        return
    # cell (ci, cj) with ci > cj maps to an upper cell: row i, column j, i < j
    t = em.temp(bi, bj, "a")
    first = True
    for ck in range(cj, ci):
        k, bk = bl[nb - 1 - ck]
        term = _mm(L.sub(i, k, bi, bk).ref, X.sub(k, j, bk, bj).ref)
        if first:
            em.emit(t.ref, term)
            first = False
        else:
            em.emit(t.ref, Add(t.ref, term))
    if variant == 0:
        em.emit(X.sub(i, j, bi, bj).ref,
                Neg(_mm(X.sub(i, i, bi, bi).ref, t.ref)))
    else:
        em.emit(t.ref, Neg(t.ref))
        solve_codelet(em, db, L.sub(i, i, bi, bi), "upper", False,
                      False, t, X.sub(i, j, bi, bj))


# -- Sylvester -----------------------------------------------------------

def trsyl_codelet(em: Emitter, db: AlgorithmDB, L: R, U: R, t: R,
                  X: R) -> None:
    """Scalar Sylvester on writable workspace t: L X + X U = t."""
    db.note(("codelet", "trsyl"))
    n, m = X.rows, X.cols
    for i in range(n):
        for j in range(m):
            if i > 0:
                _acc_sub(em, t.at(i, j),
                         _mm(L.sub(i, 0, 1, i).ref, X.sub(0, j, i, 1).ref))
            if j > 0:
                _acc_sub(em, t.at(i, j),
                         _mm(X.sub(i, 0, 1, j).ref, U.sub(0, j, j, 1).ref))
            em.emit(X.at(i, j).ref,
                    Div(t.at(i, j).ref, Add(L.at(i, i).ref, U.at(j, j).ref)))


def build_trsyl(em: Emitter, db: AlgorithmDB, fam: Family, L: R, U: R,
                C: R, X: R, variant: int, b: int) -> None:
    db.note(("algorithm", "trsyl", variant))
    rb = blocks(X.rows, b)
    cb = blocks(X.cols, b)
    for (ci, cj) in _trsyl_cells(len(rb), len(cb), variant):
        i, bi = rb[ci]
        j, bj = cb[cj]
        t = em.temp(bi, bj, "y")
        em.emit(t.ref, C.sub(i, j, bi, bj).ref)
        for ck in range(ci):
            k, bk = rb[ck]
            _acc_sub(em, t, _mm(L.sub(i, k, bi, bk).ref,
                                X.sub(k, j, bk, bj).ref))
        for ck in range(cj):
            k, bk = cb[ck]
            _acc_sub(em, t, _mm(X.sub(i, k, bi, bk).ref,
                                U.sub(k, j, bk, bj).ref))
        trsyl_codelet(em, db, L.sub(i, i, bi, bi), U.sub(j, j, bj, bj),
                      t, X.sub(i, j, bi, bj))


def _trsyl_cells(nr: int, nc: int, variant: int) -> list[tuple[int, int]]:
    if variant == 1:  # column-major
        return [(i, j) for j in range(nc) for i in range(nr)]
    if variant == 2:  # row-major
        return [(i, j) for i in range(nr) for j in range(nc)]
    out: list[tuple[int, int]] = []
    for m in range(max(nr, nc)):
        col = [(i, m) for i in range(min(m, nr))] if m < nc else []
        row = [(m, j) for j in range(min(m, nc))] if m < nr else []
        if variant == 0:  # frontier, column part first
            out.extend(col)
            out.extend(row)
        else:  # variant 3: frontier, row part first
            out.extend(row)
            out.extend(col)
        if m < nr and m < nc:
            out.append((m, m))
    return out


# -- Lyapunov ------------------------------------------------------------

def trlya_codelet(em: Emitter, db: AlgorithmDB, L: R, t: R, X: R) -> None:
    """Scalar Lyapunov on writable workspace t: L X + X L' = t, X LoSym.

    Only the lower half of X is written; reads of the upper half go
    through explicit transposes of stored elements.
    """
    db.note(("codelet", "trlya"))
    n = X.rows
    for j in range(n):
        for i in range(j, n):
            if j > 0:
                # sum_{k<j} l_ik x_kj (mirrored) + x_ik l_jk
                _acc_sub(em, t.at(i, j),
                         _mm(L.sub(i, 0, 1, j).ref, _t(X.sub(j, 0, 1, j).ref)))
                _acc_sub(em, t.at(i, j),
                         _mm(X.sub(i, 0, 1, j).ref, _t(L.sub(j, 0, 1, j).ref)))
            if i > j:
                _acc_sub(em, t.at(i, j),
                         _mm(L.sub(i, j, 1, i - j).ref, X.sub(j, j, i - j, 1).ref))
            em.emit(X.at(i, j).ref,
                    Div(t.at(i, j).ref, Add(L.at(i, i).ref, L.at(j, j).ref)))


def build_trlya(em: Emitter, db: AlgorithmDB, fam: Family, L: R, S: R,
                X: R, variant: int, b: int) -> None:
    db.note(("algorithm", "trlya", variant))
    bl = blocks(X.rows, b)
    nb = len(bl)
    if variant == 0:
        cells = [(i, j) for i in range(nb) for j in range(i + 1)]
    else:
        cells = [(i, j) for j in range(nb) for i in range(j, nb)]
    for (ci, cj) in cells:
        i, bi = bl[ci]
        j, bj = bl[cj]
        t = em.temp(bi, bj, "y")
        em.emit(t.ref, S.sub(i, j, bi, bj).ref)
        if ci == cj:
            for ck in range(ci):
                k, bk = bl[ck]
                xik = X.sub(i, k, bi, bk).ref
                lik = L.sub(i, k, bi, bk).ref
                # the two update products are transposes of each other,
                # so compute one and subtract it plus its transpose
                w = em.temp(bi, bi, "w")
                em.emit(w.ref, _mm(lik, _t(xik)))
                _acc_sub(em, t, Add(w.ref, _t(w.ref)))
            trlya_codelet(em, db, L.sub(i, i, bi, bi), t,
                          X.sub(i, i, bi, bi))
            # mirror the diagonal tile now: later cells read it whole
            for c in range(1, bi):
                for r in range(c):
                    em.emit(X.at(i + r, i + c).ref, X.at(i + c, i + r).ref)
            continue
        # off-diagonal (i > j): core L_ii X_ij + X_ij L_jj'
        for ck in range(ci):
            k, bk = bl[ck]
            if ck < cj:
                xkj = _t(X.sub(j, k, bj, bk).ref)  # mirror
            else:
                xkj = X.sub(k, j, bk, bj).ref
            _acc_sub(em, t, _mm(L.sub(i, k, bi, bk).ref, xkj))
        for ck in range(cj):
            k, bk = bl[ck]
            _acc_sub(em, t, _mm(X.sub(i, k, bi, bk).ref,
                                _t(L.sub(j, k, bj, bk).ref)))
        trsyl_codelet(em, db, L.sub(i, i, bi, bi),
                      _TransposedDiag(L, j, bj), t, X.sub(i, j, bi, bj))
    # fill the unstored upper half (plain copies, no flops) so every
    # later read of X sees a full symmetric matrix
    for cj in range(nb):
        j, bj = bl[cj]
        for ci in range(cj + 1, nb):
            i, bi = bl[ci]
            em.emit(X.sub(j, i, bj, bi).ref, _t(X.sub(i, j, bi, bj).ref))


class _TransposedDiag:
    """Adapter presenting L(j:j+b, j:j+b)' to the Sylvester codelet."""

    def __init__(self, L: R, j: int, b: int):
        self._L = L
        self._j = j
        self.rows = b
        self.cols = b

    def at(self, i: int, j: int) -> R:
        return self._L.at(self._j + j, self._j + i)

    def sub(self, i: int, j: int, rows: int, cols: int):
        inner = self._L.sub(self._j + j, self._j + i, cols, rows)
        return _TransposedView(inner)


class _TransposedView:
    def __init__(self, region: R):
        self._region = region

    @property
    def ref(self) -> Expr:
        return Transpose(self._region.ref)
