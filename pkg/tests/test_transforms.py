"""Unrolling, scalarization, and load/store analysis."""

import numpy as np
import pytest

from slingen.affine import Aff
from slingen.cir import (
    CIRFunction,
    Loop,
    MemRegion,
    Param,
    SBin,
    SLoad,
    SStore,
    VBin,
    VBlend,
    VLoad,
    VStore,
    count_flops,
    interpret,
    loadstore_analysis,
    to_cir,
    unroll_and_scalarize,
)
from slingen.cir.ir import If

from conftest import ALL_PROGRAMS, build_ir, checked


def _identical(cp, a, b, seed=0):
    from slingen.oracle import generate_inputs

    inputs = generate_inputs(cp.decls, seed=seed)
    ra = interpret(a, inputs)
    rb = interpret(b, inputs)
    assert sorted(ra) == sorted(rb)
    for k in ra:
        assert np.array_equal(ra[k], rb[k]), k


@pytest.mark.parametrize("name", ALL_PROGRAMS)
def test_transforms_bit_identical(name):
    for n in (4, 10):
        for seed in (0, 1):
            cp = checked(name, n)
            raw = build_ir(cp, optimize=False)
            opt = build_ir(cp, optimize=True)
            _identical(cp, raw, opt, seed=seed)


def test_transforms_preserve_flop_count():
    """The rewrites move loads and stores, never arithmetic."""
    for name in ("potrf", "trsyl", "kf"):
        cp = checked(name, 8)
        raw = build_ir(cp, optimize=False)
        opt = build_ir(cp, optimize=True)
        assert count_flops(raw) == count_flops(opt)


def _unroll_fixture():
    i = Aff.var("i")
    body = (
        SLoad("s0", MemRegion("a", Aff(0), i, 1)),
        SBin("s1", "mul", "s0", "s0"),
        SStore(MemRegion("x", Aff(0), i, 1), "s1"),
    )
    fn = CIRFunction("sq", [Param("a", 1, 4, "In"),
                            Param("x", 1, 4, "Out")])
    fn.body = [Loop("i", Aff(0), Aff(4), 1, body)]
    return fn


def test_unroll_flattens_constant_loops():
    fn = unroll_and_scalarize(_unroll_fixture())
    assert not any(isinstance(ins, (Loop, If)) for ins in fn.body)
    a = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert np.array_equal(interpret(fn, {"a": a})["x"], a * a)


def test_unroll_keeps_large_loops():
    i = Aff.var("i")
    body = (SLoad("s0", MemRegion("a", Aff(0), i, 1)),
            SStore(MemRegion("x", Aff(0), i, 1), "s0"))
    fn = CIRFunction("big", [Param("a", 1, 64, "In"),
                             Param("x", 1, 64, "Out")])
    fn.body = [Loop("i", Aff(0), Aff(64), 1, body)]
    out = unroll_and_scalarize(fn)
    assert any(isinstance(ins, Loop) for ins in out.body)
    a = np.arange(64.0).reshape(1, 64)
    assert np.array_equal(interpret(out, {"a": a})["x"], a)


def test_scalarize_deduplicates_repeated_loads():
    r = MemRegion("a", Aff(0), Aff(0), 4)
    fn = CIRFunction("dup", [Param("a", 1, 4, "In"),
                             Param("x", 1, 4, "Out")])
    fn.body = [
        VLoad("v0", r),
        VLoad("v1", r),
        VBin("v2", "add", "v0", "v1", 4),
        VStore(MemRegion("x", Aff(0), Aff(0), 4), "v2"),
    ]
    out = unroll_and_scalarize(fn)
    loads = [ins for ins in out.body if isinstance(ins, VLoad)]
    assert len(loads) == 1
    a = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert np.array_equal(interpret(out, {"a": a})["x"], 2 * a)


def test_scalarize_invalidates_on_store():
    r = MemRegion("a", Aff(0), Aff(0), 4)
    fn = CIRFunction("inval", [Param("a", 1, 4, "InOut"),
                               Param("x", 1, 4, "Out")])
    fn.body = [
        VLoad("v0", r),
        VBin("v1", "add", "v0", "v0", 4),
        VStore(r, "v1"),
        VLoad("v2", r),          # must observe the store
        VStore(MemRegion("x", Aff(0), Aff(0), 4), "v2"),
    ]
    out = unroll_and_scalarize(fn)
    a = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert np.array_equal(interpret(out, {"a": a.copy()})["x"], 2 * a)


def test_fig_sequence_blend_forwarding():
    """Two horizontal stores followed by a vertical load spanning both
    rows: the load becomes one blend of the stored values, no reload."""
    fn = CIRFunction("seq", [Param("S", 4, 4, "InOut"),
                             Param("x", 2, 1, "Out")])
    fn.body = [
        VLoad("v0", MemRegion("S", Aff(0), Aff(1), 3)),
        VLoad("v1", MemRegion("S", Aff(1), Aff(2), 2)),
        VStore(MemRegion("S", Aff(0), Aff(1), 3), "v0"),
        VStore(MemRegion("S", Aff(1), Aff(2), 2), "v1"),
        VLoad("v2", MemRegion("S", Aff(0), Aff(2), 2, "vert")),
        VStore(MemRegion("x", Aff(0), Aff(0), 2, "vert"), "v2"),
    ]
    out, report = loadstore_analysis(fn)
    assert report.blends == 1
    assert report.reloads == 0
    blends = [ins for ins in out.walk() if isinstance(ins, VBlend)]
    assert len(blends) == 1
    # element 1 of the first store with element 0 of the second
    assert blends[0].picks == ((0, 1), (1, 0))
    s = np.arange(16.0).reshape(4, 4)
    got = interpret(out, {"S": s.copy()})
    assert np.array_equal(got["x"][:, 0], [s[0, 2], s[1, 2]])


def test_chol_codelet_analysis_report(chol_codelet):
    fn = build_ir(chol_codelet, optimize=False)
    opt, report = loadstore_analysis(unroll_and_scalarize(fn))
    assert report.blends == 1
    assert any(isinstance(ins, VBlend) for ins in opt.walk())
    _identical(chol_codelet, fn, opt)


def test_dead_temp_stores_eliminated():
    fn = CIRFunction("dse", [Param("a", 1, 4, "In"),
                             Param("x", 1, 4, "Out")],
                     temps={"t": (1, 4)})
    fn.body = [
        VLoad("v0", MemRegion("a", Aff(0), Aff(0), 4)),
        VStore(MemRegion("t", Aff(0), Aff(0), 4), "v0"),  # never read
        VStore(MemRegion("x", Aff(0), Aff(0), 4), "v0"),
    ]
    out, report = loadstore_analysis(fn)
    assert report.dead_stores == 1
    stores = [ins for ins in out.body if isinstance(ins, VStore)]
    assert [s.region.name for s in stores] == ["x"]


def test_output_stores_never_eliminated():
    fn = CIRFunction("keep", [Param("a", 1, 4, "In"),
                              Param("x", 1, 4, "Out")])
    fn.body = [
        VLoad("v0", MemRegion("a", Aff(0), Aff(0), 4)),
        VStore(MemRegion("x", Aff(0), Aff(0), 4), "v0"),
        VStore(MemRegion("x", Aff(0), Aff(0), 4), "v0"),
    ]
    out, _ = loadstore_analysis(fn)
    stores = [ins for ins in out.body if isinstance(ins, VStore)]
    assert len(stores) == 2


def test_analysis_conservative_across_control_flow():
    i = Aff.var("i")
    fn = CIRFunction("cf", [Param("a", 1, 8, "InOut")])
    fn.body = [
        VLoad("v0", MemRegion("a", Aff(0), Aff(0), 4)),
        VStore(MemRegion("a", Aff(0), Aff(4), 4), "v0"),
        Loop("i", Aff(0), Aff(8), 1,
             (SLoad("s0", MemRegion("a", Aff(0), i, 1)),
              SBin("s1", "add", "s0", "s0"),
              SStore(MemRegion("a", Aff(0), i, 1), "s1"))),
        VLoad("v1", MemRegion("a", Aff(0), Aff(4), 4)),
        VStore(MemRegion("a", Aff(0), Aff(0), 4), "v1"),
    ]
    out, _ = loadstore_analysis(fn)
    # the load after the loop must stay a real load
    loads = [ins for ins in out.body if isinstance(ins, VLoad)]
    assert len(loads) == 2
    a = np.arange(8.0).reshape(1, 8)
    want = interpret(fn, {"a": a.copy()})["a"]
    got = interpret(out, {"a": a.copy()})["a"]
    assert np.array_equal(got, want)


def test_report_counts_are_consistent():
    for name in ("potrf", "trtri"):
        cp = checked(name, 8)
        fn = unroll_and_scalarize(build_ir(cp, optimize=False))
        _, report = loadstore_analysis(fn)
        resolved = (report.forwarded_vector + report.blends
                    + report.shuffles)
        assert resolved >= 0
        for field in ("forwarded_vector", "forwarded_scalar", "blends",
                      "shuffles", "extracts", "reloads", "loads_kept",
                      "dead_stores"):
            assert getattr(report, field) >= 0
