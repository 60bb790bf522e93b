"""Scalar packing: runs of adjacent scalar statements become regions."""

import numpy as np
import pytest

from slingen.frontend import Assign, Div, Literal, Mul, RegionRef, Transpose
from slingen.oracle import generate_inputs, rel_error
from slingen.oracle.evaluate import evaluate_basic
from slingen.synthesis.lower import lower
from slingen.tiling import pack_scalars

from conftest import ALL_PROGRAMS, checked


def _packed(name, n, blocksize=4):
    cp = checked(name, n)
    bp = lower(cp, blocksize=blocksize)
    packed, log = pack_scalars(bp)
    return cp, bp, packed, log


def test_chol_codelet_division_rewrites(chol_codelet):
    """The nu=4 Cholesky codelet gets the two division rewrites: pack
    the per-row divisions over their common denominator (R0), then turn
    the packed division into reciprocal and multiply (R1)."""
    bp = lower(chol_codelet, blocksize=4)
    _, log = pack_scalars(bp)
    r0 = [r for r in log if r.rule == "R0"]
    r1 = [r for r in log if r.rule == "R1"]
    assert len(r0) == 2 and len(r1) == 2
    # rows 0 and 1 scale 3 and 2 trailing elements respectively
    assert sorted(r.count for r in r0) == [2, 3]
    for a, b in zip(r0, r1):
        assert a.index == b.index and a.count == b.count


def test_chol_codelet_rewrite_shape(chol_codelet):
    """Structural form: t = 1/x followed by region = t * region'."""
    packed, _ = pack_scalars(lower(chol_codelet, blocksize=4))
    stmts = packed.stmts
    found = 0
    for i, s in enumerate(stmts[:-1]):
        if (isinstance(s.rhs, Div) and isinstance(s.rhs.left, Literal)
                and s.rhs.left.value == 1.0):
            nxt = stmts[i + 1]
            assert isinstance(nxt.rhs, Mul)
            assert nxt.rhs.left == s.lhs
            assert isinstance(nxt.lhs, RegionRef)
            assert nxt.lhs.cols.eval({}) > 1
            found += 1
    assert found == 2


def test_single_division_left_alone(chol_codelet):
    """The last in-row division (one element) is not worth packing."""
    packed, _ = pack_scalars(lower(chol_codelet, blocksize=4))
    lone = [s for s in packed.stmts
            if isinstance(s.rhs, Div)
            and not isinstance(s.rhs.left, Literal)]
    assert len(lone) == 1


def test_packing_never_grows_the_program():
    for name in ALL_PROGRAMS:
        _, bp, packed, log = _packed(name, 8)
        assert len(packed.stmts) <= len(bp.stmts)
        for rec in log:
            assert rec.count >= 2


def test_packed_runs_preserve_values_bitwise_without_divisions():
    """Rewrites other than R1 reorder nothing, so values match exactly."""
    for name in ("trsyl", "l1a"):
        cp, bp, packed, log = _packed(name, 8)
        if any(r.rule == "R1" for r in log):
            continue
        inputs = generate_inputs(cp.decls, seed=1)
        a = evaluate_basic(bp, inputs)
        b = evaluate_basic(packed, inputs)
        for k in a:
            assert np.array_equal(a[k], b[k]), f"{name} {k}"


def test_packed_programs_equivalent_within_tolerance():
    for name in ALL_PROGRAMS:
        for seed in (0, 1):
            cp, bp, packed, _ = _packed(name, 10)
            inputs = generate_inputs(cp.decls, seed=seed)
            a = evaluate_basic(bp, inputs)
            b = evaluate_basic(packed, inputs)
            for k in a:
                assert rel_error(b[k], a[k]) < 1e-12, f"{name} {k}"


def test_packing_is_idempotent():
    for name in ALL_PROGRAMS:
        _, _, packed, _ = _packed(name, 8)
        again, log = pack_scalars(packed)
        assert not log
        assert len(again.stmts) == len(packed.stmts)


def test_pack_respects_read_after_write():
    """A run member reading a cell written earlier in the run must not
    be packed across that dependency."""
    for name in ALL_PROGRAMS:
        cp, _, packed, _ = _packed(name, 8)
        inputs = generate_inputs(cp.decls, seed=3)
        vals = evaluate_basic(packed, inputs)
        base = evaluate_basic(lower(cp, blocksize=4), inputs)
        for k in base:
            assert rel_error(vals[k], base[k]) < 1e-12


def test_transposed_strips_marked():
    """A vertical source run feeding a horizontal target packs with an
    explicit transpose on the strip."""
    from slingen.affine import Aff
    from slingen.frontend import OperandDecl
    from slingen.synthesis.basic import BasicProgram

    def cell(name, r, c, rows=1, cols=1):
        return RegionRef(name, Aff(r), Aff(c), Aff(rows), Aff(cols))

    decls = {
        "S": OperandDecl("S", "matrix", 4, 4, "In"),
        "U": OperandDecl("U", "matrix", 4, 4, "Out"),
        "d": OperandDecl("d", "scalar", 1, 1, "In"),
    }
    stmts = [Assign(cell("U", 0, j),
                    Div(cell("S", j, 0), cell("d", 0, 0)), j)
             for j in range(3)]
    packed, log = pack_scalars(BasicProgram(decls, stmts, "vert"))
    assert [r.rule for r in log] == ["R0", "R1"]
    smul = packed.stmts[-1]
    assert isinstance(smul.rhs, Mul)
    assert isinstance(smul.rhs.right, Transpose)
    strip = smul.rhs.right.child
    assert isinstance(strip, RegionRef)
    assert strip.rows.eval({}) == 3 and strip.cols.eval({}) == 1
    inputs = {"S": np.arange(16.0).reshape(4, 4) + 1,
              "d": np.array([[2.0]])}
    got = evaluate_basic(packed, inputs)["U"]
    want = np.zeros((4, 4))
    want[0, :3] = inputs["S"][:3, 0] / 2.0
    assert rel_error(got, want) < 1e-15
