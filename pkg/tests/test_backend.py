"""C emission: scalar and vec256 profiles."""

import os
import shutil
import subprocess

import numpy as np
import pytest

from slingen.affine import Aff
from slingen.backend import emit, profile_by_name, write_sources
from slingen.cir import (
    CIRFunction,
    MemRegion,
    Param,
    VBlend,
    VLoad,
    VStore,
    interpret,
    loadstore_analysis,
)
from slingen.oracle import generate_inputs

from conftest import build_ir, checked

HAVE_CC = shutil.which("gcc") is not None


def _emitted(name, n, isa, optimize=True):
    cp = checked(name, n)
    fn = build_ir(cp, optimize=optimize)
    return cp, fn, emit(fn, profile_by_name(isa))


def test_profiles_exist():
    scalar = profile_by_name("scalar")
    vec = profile_by_name("vec256")
    assert scalar.name == "scalar" and vec.name == "vec256"
    assert "-mavx2" in vec.flags
    assert "-ffp-contract=off" in scalar.flags
    with pytest.raises(ValueError):
        profile_by_name("vec512")


def test_emission_is_deterministic():
    _, _, a = _emitted("potrf", 8, "vec256")
    _, _, b = _emitted("potrf", 8, "vec256")
    assert a.files == b.files


def test_scalar_output_has_no_intrinsics():
    _, _, src = _emitted("trsyl", 8, "scalar")
    body = src.files[src.main_file]
    assert "_mm256" not in body
    assert "__m256d" not in body
    assert "#include <immintrin.h>" not in body


def test_vec256_output_uses_intrinsics():
    _, _, src = _emitted("potrf", 8, "vec256")
    body = src.files[src.main_file]
    assert "_mm256" in body
    assert "immintrin.h" in "".join(src.files.values())


def test_signature_and_header():
    cp, fn, src = _emitted("potrf", 8, "scalar")
    assert src.signature.startswith("void potrf(")
    assert "restrict" in src.signature
    assert "const double*" in src.signature
    header = src.files["potrf.h"]
    assert src.signature in header
    assert src.main_file == "potrf.c"
    assert "codelets.h" in src.files


def test_provenance_comment():
    cp = checked("potrf", 8)
    fn = build_ir(cp)
    src = emit(fn, profile_by_name("scalar"),
               {"version": "1.2.3", "source_hash": "cafe", "variant": "v9"})
    head = src.files[src.main_file]
    assert "slingen 1.2.3" in head
    assert "cafe" in head and "v9" in head


def test_operand_name_collision_avoided():
    """kf declares operands v0/v1/v2, which collide with IR value names
    unless the emitter renames values."""
    _, _, src = _emitted("kf", 8, "vec256")
    body = src.files[src.main_file]
    assert "double* restrict v0" in src.signature or \
        "const double* restrict v0" in src.signature
    assert src.files  # emission completed without name clashes


def _fig_sequence():
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
    return fn


def test_vec256_blend_structure():
    """Post-analysis emission of the store/store/load sequence: the
    vertical reload disappears in favor of one register blend."""
    fn, report = loadstore_analysis(_fig_sequence())
    src = emit(fn, profile_by_name("vec256"))
    body = src.files[src.main_file]
    assert report.blends == 1 and report.reloads == 0
    assert body.count("slingen_blend") + body.count("_mm256_blend_pd") == 1
    # two stores survive; no load of the forwarded column remains
    assert "maskstore" in body or "storeu" in body or "store" in body


def _compile_and_run(cp, fn, src, seed=0):
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        paths = write_sources(src, d)
        cname = os.path.join(d, "main.c")
        inputs = generate_inputs(cp.decls, seed=seed)
        want = interpret(fn, inputs)
        lines = ["#include <stdio.h>", f'#include "{fn.name}.h"', "",
                 "int main(void) {"]
        for p in fn.params:
            vals = inputs.get(p.name)
            flat = (np.asarray(vals, dtype=float).reshape(-1)
                    if vals is not None
                    else np.zeros(p.rows * p.cols))
            init = ", ".join(repr(float(x)) for x in flat)
            lines.append(f"  double {p.name}[{p.rows * p.cols}]"
                         f" = {{{init}}};")
        args = ", ".join(p.name for p in fn.params)
        lines.append(f"  {fn.name}({args});")
        for p in fn.params:
            lines.append(
                f"  for (int i = 0; i < {p.rows * p.cols}; i++)"
                f' printf("%.17g\\n", {p.name}[i]);')
        lines += ["  return 0;", "}"]
        with open(cname, "w") as f:
            f.write("\n".join(lines) + "\n")
        exe = os.path.join(d, "a.out")
        subprocess.run(["gcc", *src.flags, cname,
                        os.path.join(d, src.main_file), "-o", exe, "-lm"],
                       check=True)
        out = subprocess.run([exe], capture_output=True, text=True,
                             check=True).stdout.split()
        vals = [float(x) for x in out]
        got = {}
        off = 0
        for p in fn.params:
            size = p.rows * p.cols
            got[p.name] = np.array(vals[off:off + size]).reshape(
                p.rows, p.cols)
            off += size
        return got, want


@pytest.mark.skipif(not HAVE_CC, reason="no C compiler")
@pytest.mark.parametrize("name", ("potrf", "trlya", "kf"))
def test_compiled_scalar_bit_identical_to_interpreter(name):
    cp, fn, src = _emitted(name, 8, "scalar")
    got, want = _compile_and_run(cp, fn, src)
    for k in want:
        assert np.array_equal(got[k], want[k]), k


@pytest.mark.skipif(not HAVE_CC, reason="no C compiler")
@pytest.mark.parametrize("name", ("potrf", "trsyl"))
def test_compiled_vec256_matches_interpreter(name):
    cp, fn, src = _emitted(name, 8, "vec256")
    got, want = _compile_and_run(cp, fn, src)
    for k in want:
        denom = max(1.0, float(np.max(np.abs(want[k]))))
        assert np.max(np.abs(got[k] - want[k])) / denom < 1e-12, k


def test_write_sources(tmp_path):
    _, _, src = _emitted("potrf", 4, "scalar")
    paths = write_sources(src, tmp_path)
    assert sorted(os.path.basename(p) for p in paths) == \
        sorted(src.files)
    for p in paths:
        assert os.path.getsize(p) > 0
