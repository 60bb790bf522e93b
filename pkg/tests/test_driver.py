"""Variants, measurement, operand files, and the CLI."""

import json
import os

import numpy as np
import pytest

from slingen.driver import (
    FormatError,
    Limits,
    Measurement,
    VariantConfig,
    compile_variant,
    enumerate_variants,
    load_report,
    read_operands,
    run_tune,
    save_report,
    select,
    write_operands,
)
from slingen.driver.cli import main
from slingen.driver.measure import TuneError, measure
from slingen.driver.verify import verify_variant

from conftest import PROGRAMS_DIR, checked


def test_variant_config_identity():
    a = VariantConfig((0, 1), 4, 8, "scalar", 4)
    b = VariantConfig((0, 1), 4, 8, "scalar", 4)
    c = VariantConfig((1, 1), 4, 8, "scalar", 4)
    assert a.id == b.id and a.id != c.id
    assert len(a.id) == 16
    assert "inv=" in a.canonical and "isa=scalar" in a.canonical


def test_enumerate_variants_counts():
    cp = checked("potrf", 8)
    space = enumerate_variants(cp, isa="scalar", nu=4)
    # 3 invariants x 2 blocksizes (nu, 2 nu)
    assert len(space.variants) == 6
    cp = checked("kf", 8)
    space = enumerate_variants(cp, isa="scalar", nu=4)
    # 3*1*1*1*1 invariant combinations x 2 blocksizes
    assert len(space.variants) == 6
    ids = [v.id for v in space.variants]
    assert len(set(ids)) == len(ids)


def test_enumerate_variants_deterministic_and_limited():
    cp = checked("potrf", 8)
    a = enumerate_variants(cp, isa="vec256", nu=4)
    b = enumerate_variants(cp, isa="vec256", nu=4)
    assert [v.id for v in a.variants] == [v.id for v in b.variants]
    lim = enumerate_variants(cp, isa="vec256", nu=4, limits=Limits(2))
    assert len(lim.variants) == 2
    assert lim.notes


def _m(vid, median, flops=100):
    return Measurement(vid, vid, [median], median, median, median,
                       flops, flops / median)


def test_select_minimum_median():
    assert select([_m("b", 50.0), _m("a", 40.0), _m("c", 60.0)]) == "a"


def test_select_tie_break_is_lexicographic():
    assert select([_m("zz", 50.0), _m("aa", 50.0), _m("mm", 50.0)]) == "aa"


def test_select_empty_raises():
    with pytest.raises(TuneError):
        select([])


def test_select_is_pure_replay():
    ms = [_m("b", 50.0), _m("a", 40.0)]
    assert select(ms) == select(list(reversed(ms))) == "a"


def test_measure_simulated_cycles():
    cp = checked("potrf", 8)
    cfg = enumerate_variants(cp, isa="scalar", nu=4).variants[0]
    cv = compile_variant(cp, cfg)
    m = measure(cv, reps=5)
    assert m.cycles == [float(cv.ops)] * 5
    assert m.median_cycles == float(cv.ops)
    assert m.flops == cv.flops


def test_run_tune_and_report_round_trip(tmp_path):
    cp = checked("potrf", 8)
    variants = enumerate_variants(cp, isa="scalar", nu=4).variants
    report = run_tune(cp, variants, reps=3)
    assert report.selected in {m.variant_id for m in report.variants}
    # identical selection on a rerun
    assert run_tune(cp, variants, reps=3).selected == report.selected

    path = tmp_path / "tune.json"
    save_report(report, path)
    doc = json.loads(path.read_text())
    assert set(doc) >= {"program", "host", "isa", "nu", "variants",
                        "selected", "timing_source"}
    for v in doc["variants"]:
        assert set(v) == {"id", "config", "median_cycles", "q1", "q3",
                          "flops", "f_per_c"}
    loaded = load_report(path)
    assert loaded.selected == report.selected
    assert loaded.program == "potrf"


def test_run_tune_excludes_failing_variants():
    cp = checked("potrf", 8)
    good = enumerate_variants(cp, isa="scalar", nu=4).variants[0]
    bad = VariantConfig((99,), 4, 8, "scalar", 4)
    report = run_tune(cp, [bad, good], reps=2)
    assert report.selected == good.id
    assert any("excluded" in n for n in report.notes)


def test_operand_file_round_trip(tmp_path):
    path = tmp_path / "ops.bin"
    rng = np.random.default_rng(0)
    ops = [("A", rng.standard_normal((3, 4))),
           ("x", rng.standard_normal((5, 1)))]
    write_operands(path, ops)
    back = read_operands(path)
    assert [n for n, _ in back] == ["A", "x"]
    for (_, a), (_, b) in zip(ops, back):
        assert np.array_equal(a, b)


def test_operand_file_format_errors(tmp_path):
    path = tmp_path / "ops.bin"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 8)
    with pytest.raises(FormatError):
        read_operands(path)
    write_operands(path, [("A", np.zeros((2, 2)))])
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError):
        read_operands(path)
    path.write_bytes(data + b"\0" * 4)
    with pytest.raises(FormatError):
        read_operands(path)


def test_verify_variant_passes():
    cp = checked("potrf", 8)
    cfg = enumerate_variants(cp, isa="scalar", nu=4).variants[0]
    result = verify_variant(cp, cfg, range(3))
    assert result.ok
    assert result.checks > 0


def _potrf_path():
    return os.path.join(PROGRAMS_DIR, "potrf.la")


def test_cli_compile(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["compile", _potrf_path(), "--bind", "n=8",
               "--out", str(out),
               "--dump-tiled", str(tmp_path), "--dump-cir", str(tmp_path)])
    assert rc == 0
    assert (out / "potrf.c").exists()
    assert (out / "potrf.h").exists()
    assert (out / "codelets.h").exists()
    assert (tmp_path / "potrf.tiled").exists()
    assert (tmp_path / "potrf.pre.cir").exists()
    assert (tmp_path / "potrf.post.cir").exists()


def test_cli_compile_is_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["compile", _potrf_path(), "--bind", "n=8",
                     "--isa", "vec256", "--out", str(out)]) == 0
    for name in ("potrf.c", "potrf.h", "codelets.h"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_test_passes(capsys):
    rc = main(["test", _potrf_path(), "--bind", "n=8", "--seeds", "3"])
    assert rc == 0
    assert "checks passed" in capsys.readouterr().out


def test_cli_tune_and_report(tmp_path, capsys):
    tune = tmp_path / "tune.json"
    rc = main(["tune", _potrf_path(), "--bind", "n=8", "--reps", "3",
               "--out", str(tune)])
    assert rc == 0
    rc = main(["report", str(tune)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "*" in out and "potrf" in out


def test_cli_usage_errors(tmp_path):
    assert main(["compile"]) == 2                        # missing --out
    assert main(["test", str(tmp_path / "no.la")]) == 2  # missing file
    assert main(["test", _potrf_path(), "--bind", "n"]) == 2
    assert main(["test", _potrf_path()]) == 2            # unbound n
    assert main(["frobnicate"]) == 2
