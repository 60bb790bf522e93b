"""Tile grids, structure annotations, and the tiler."""

import numpy as np
import pytest

from slingen.frontend import OperandDecl
from slingen.oracle import generate_inputs, rel_error
from slingen.oracle.evaluate import evaluate_basic
from slingen.synthesis.lower import lower
from slingen.tiling import format_tiled, pack_scalars, tile_program
from slingen.tiling.tiles import (
    GENERAL,
    LOTRI,
    MIRROR,
    UPTRI,
    ZERO,
    annotation,
    grid_of,
    make_tile,
    zero_tile,
)
from slingen.tiling.tile import CodeletCall, ScalarStmt

from conftest import ALL_PROGRAMS, checked, masked, observable_outputs


def _decl(name, n, *props, iotype="In"):
    return OperandDecl(name, "matrix", n, n, iotype, frozenset(props))


def test_uptri_8x8_grid():
    """8x8 upper triangular at nu=4: BL zero, diagonal UpTri, TR full."""
    g = grid_of(_decl("U", 8, "UpTri"), 4)
    assert g.dims == (2, 2)
    assert g.ann(0, 0) == UPTRI
    assert g.ann(1, 1) == UPTRI
    assert g.ann(0, 1) == GENERAL
    assert g.ann(1, 0) == ZERO


def test_lotri_grid_is_transposed_picture():
    g = grid_of(_decl("L", 8, "LoTri"), 4)
    assert g.ann(0, 0) == LOTRI and g.ann(1, 1) == LOTRI
    assert g.ann(0, 1) == ZERO and g.ann(1, 0) == GENERAL


def test_leftover_grid_6():
    """n=6 at nu=4 gives 4+2 blocks in each dimension."""
    g = grid_of(_decl("U", 6, "UpTri"), 4)
    assert g.row_blocks == ((0, 4), (4, 2))
    assert g.col_blocks == ((0, 4), (4, 2))
    assert g.ann(1, 0) == ZERO


def test_symmetric_grid_mirrors():
    g = grid_of(_decl("S", 8, "UpSym"), 4)
    assert g.ann(1, 0) == MIRROR
    assert g.ann(0, 1) == GENERAL
    g = grid_of(_decl("S", 8, "LoSym"), 4)
    assert g.ann(0, 1) == MIRROR


def test_annotation_off_diagonal_blocks_are_general():
    d = _decl("U", 12, "UpTri")
    assert annotation(d, 0, 8, 4, 4) == GENERAL
    assert annotation(d, 8, 0, 4, 4) == ZERO
    assert annotation(d, 4, 4, 4, 4) == UPTRI


def test_make_tile_transposes_annotation():
    d = _decl("U", 8, "UpTri")
    t = make_tile(d, 0, 0, 4, 4, trans=True)
    assert t.ann == LOTRI
    assert t.shape == (4, 4)
    assert zero_tile(make_tile(d, 4, 0, 4, 4, trans=False))
    assert not zero_tile(t)


def _tiled(name, n, nu=4):
    cp = checked(name, n)
    bp = lower(cp, blocksize=nu)
    packed, _ = pack_scalars(bp)
    return cp, packed, tile_program(packed, nu=nu)


def test_zero_tiles_elided():
    """No codelet call ever reads a structurally zero tile."""
    for name in ("potrf", "trtri", "trsyl"):
        _, _, tp = _tiled(name, 12)
        for st in tp.stmts:
            if isinstance(st, CodeletCall):
                for t in st.ins:
                    if not isinstance(t, float):
                        assert t.ann != ZERO


def test_mirror_fill_uses_copy_kernels():
    """Dead symmetric halves are filled by transpose copies, which cost
    no flops."""
    _, _, tp = _tiled("kf", 8)
    copies = [st for st in tp.stmts if isinstance(st, CodeletCall)
              and st.kernel.startswith("copy")]
    assert copies
    for st in copies:
        assert len(st.ins) == 1


def test_calls_are_vector_size():
    for name in ALL_PROGRAMS:
        _, _, tp = _tiled(name, 10)
        for st in tp.stmts:
            if isinstance(st, CodeletCall):
                assert st.out.rows <= 4 and st.out.cols <= 4
                for t in st.ins:
                    if not isinstance(t, float):
                        assert t.rows <= 4 and t.cols <= 4


def _run_tiled(tp, inputs):
    """Execute a tiled program with numpy, tile by tile."""
    vals = {d.name: np.array(inputs[d.name], dtype=float, copy=True)
            if d.name in inputs else np.zeros((d.rows, d.cols))
            for d in tp.decls.values()}

    def rd(t):
        if isinstance(t, float):
            return t
        v = vals[t.name][t.r0:t.r0 + t.rows, t.c0:t.c0 + t.cols]
        return v.T if t.trans else v

    for st in tp.stmts:
        if isinstance(st, ScalarStmt):
            from slingen.oracle.evaluate import _store
            _store(st.stmt, vals)
            continue
        op = st.kernel.split("_")[0]
        ins = [rd(t) for t in st.ins]
        if op in ("add", "sub"):
            v = ins[0] + ins[1] if op == "add" else ins[0] - ins[1]
        elif op == "smul":
            v = np.asarray(ins[0]).reshape(()) * ins[1]
        elif op == "div":
            v = ins[0] / np.asarray(ins[1]).reshape(())
        elif op == "mul":
            v = np.asarray(ins[0]) @ np.asarray(ins[1])
        elif op == "neg":
            v = -ins[0]
        elif op == "copy":
            v = np.array(ins[0])
        elif op == "trans":
            v = np.asarray(ins[0]).T
        elif op == "zero":
            v = 0.0
        else:
            raise AssertionError(f"unknown kernel {st.kernel}")
        o = st.out
        tgt = vals[o.name][o.r0:o.r0 + o.rows, o.c0:o.c0 + o.cols]
        v = np.broadcast_to(np.asarray(v).reshape(o.rows, o.cols)
                            if np.ndim(v) else v, tgt.shape)
        if st.acc == "set":
            tgt[:, :] = v
        elif st.acc == "add":
            tgt[:, :] += v
        else:
            tgt[:, :] -= v
    return vals


@pytest.mark.parametrize("name", ALL_PROGRAMS)
def test_tiled_equivalent_to_basic(name):
    for n in (6, 10):
        cp, packed, tp = _tiled(name, n)
        inputs = generate_inputs(cp.decls, seed=2)
        base = evaluate_basic(packed, inputs)
        vals = _run_tiled(tp, inputs)
        for out in observable_outputs(cp):
            d = cp.decls[out]
            err = rel_error(masked(d, vals[out]), masked(d, base[out]))
            assert err < 1e-12, f"{name} n={n} {out}: {err:.2e}"


def test_format_tiled_structure():
    _, _, tp = _tiled("potrf", 8)
    text = format_tiled(tp)
    lines = text.splitlines()
    assert lines[0] == "program potrf nu=4"
    assert any("= mul_" in ln or "-= mul_" in ln for ln in lines)
    assert any("'" in ln for ln in lines)  # transposed tiles marked
    # one line per declaration and statement
    assert len(lines) == 1 + len(tp.decls) + len(tp.stmts)
    # structured tiles carry their annotation
    _, _, tp2 = _tiled("trtri", 8)
    assert any("<UpTri>" in ln or "<LoTri>" in ln
               for ln in format_tiled(tp2).splitlines())
