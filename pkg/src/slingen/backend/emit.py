"""Unparsing IR to C translation units.

Emission is a pure function of IR and profile: same input, byte-same
output.  The scalar profile mirrors the interpreter's per-lane
evaluation order exactly; with FP contraction disabled the compiled
kernel is bit-identical to interpretation.  The vec256 profile keeps
reductions sequential over extracted lanes, so it reproduces the same
values up to the sign of zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..affine import Aff
from ..cir.ir import (
    HOR,
    CIRFunction,
    If,
    Loop,
    MemRegion,
    SBin,
    SConst,
    SLoad,
    SStore,
    SUn,
    VBin,
    VBlend,
    VBroadcast,
    VExtract,
    VLoad,
    VReduce,
    VShuffle,
    VStore,
    VUn,
)
from .profiles import IsaProfile

_BIN = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


class EmitError(Exception):
    """An instruction the profile cannot express (an IR builder bug)."""


@dataclass
class EmittedSource:
    files: dict[str, str]
    signature: str
    flags: tuple[str, ...]
    main_file: str = ""
    notes: list = field(default_factory=list)


def _c_float(x: float) -> str:
    s = repr(float(x))
    return s if ("." in s or "e" in s or "inf" in s or "nan" in s) else s + ".0"


def _aff(a: Aff) -> str:
    return str(a)


def _value_prefix(taken: set[str]) -> str:
    for cand in ("", "t_", "u_", "w_", "x_"):
        if cand == "":
            # raw value names are fine unless an operand looks like one
            if not any(_looks_like_value(n) for n in taken):
                return cand
        elif not any(n.startswith(cand) for n in taken):
            return cand
    return "slv_"


def _looks_like_value(name: str) -> bool:
    return (len(name) > 1 and name[0] in "vs" and name[1:].isdigit())


class _Emitter:
    def __init__(self, fn: CIRFunction, isa: IsaProfile):
        self.fn = fn
        self.isa = isa
        self.dims = {p.name: (p.rows, p.cols) for p in fn.params}
        self.dims.update(fn.temps)
        self.pref = _value_prefix(set(self.dims))
        self.lines: list[str] = []

    def v(self, name: str) -> str:
        return self.pref + name

    def line(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    def addr(self, r: MemRegion, lane: int = 0) -> str:
        _, ld = self.dims[r.name]
        dr, dc = (0, lane) if r.dir == HOR else (lane, 0)
        row = r.row + dr
        col = r.col + dc
        if row.is_const and col.is_const:
            return f"{r.name}[{row.const * ld + col.const}]"
        return f"{r.name}[({_aff(row)})*{ld} + ({_aff(col)})]"

    # ---- scalar profile ----

    def scalar_instr(self, ins, depth: int) -> None:
        ln = self.line
        v = self.v
        if isinstance(ins, VLoad):
            for t in range(ins.lanes):
                ln(depth, f"double {v(ins.dst)}_{t} = "
                   f"{self.addr(ins.region, t)};")
        elif isinstance(ins, VStore):
            for t in range(ins.lanes):
                ln(depth, f"{self.addr(ins.region, t)} = {v(ins.src)}_{t};")
        elif isinstance(ins, VBin):
            op = _BIN[ins.op]
            for t in range(ins.lanes):
                ln(depth, f"double {v(ins.dst)}_{t} = "
                   f"{v(ins.a)}_{t} {op} {v(ins.b)}_{t};")
        elif isinstance(ins, VUn):
            for t in range(ins.lanes):
                rhs = (f"-{v(ins.a)}_{t}" if ins.op == "neg"
                       else f"sqrt({v(ins.a)}_{t})")
                ln(depth, f"double {v(ins.dst)}_{t} = {rhs};")
        elif isinstance(ins, VBroadcast):
            for t in range(ins.lanes):
                ln(depth, f"double {v(ins.dst)}_{t} = {v(ins.src)};")
        elif isinstance(ins, VReduce):
            expr = " + ".join(f"{v(ins.src)}_{t}" for t in range(ins.lanes))
            ln(depth, f"double {v(ins.dst)} = {expr};")
        elif isinstance(ins, VExtract):
            ln(depth, f"double {v(ins.dst)} = {v(ins.src)}_{ins.lane};")
        elif isinstance(ins, VBlend):
            for t, (which, lane) in enumerate(ins.picks):
                src = ins.a if which == 0 else ins.b
                ln(depth, f"double {v(ins.dst)}_{t} = {v(src)}_{lane};")
        elif isinstance(ins, VShuffle):
            for t, lane in enumerate(ins.sel):
                ln(depth, f"double {v(ins.dst)}_{t} = {v(ins.a)}_{lane};")
        else:
            self.common_instr(ins, depth, self.scalar_instr)

    # ---- vec256 profile ----

    def vec_instr(self, ins, depth: int) -> None:
        ln = self.line
        v = self.v
        m = self.isa.mnemonics
        if isinstance(ins, VLoad):
            r = ins.region
            if r.dir == HOR and ins.lanes == 4:
                rhs = f"{m['load']}(&{self.addr(r)})"
            elif r.dir == HOR:
                rhs = (f"{m['maskload']}(&{self.addr(r)}, "
                       f"slingen_mask({ins.lanes}))")
            else:
                elems = [self.addr(r, t) if t < ins.lanes else "0.0"
                         for t in range(4)]
                rhs = f"{m['set']}({', '.join(reversed(elems))})"
            ln(depth, f"__m256d {v(ins.dst)} = {rhs};")
        elif isinstance(ins, VStore):
            r = ins.region
            if r.dir == HOR and ins.lanes == 4:
                ln(depth, f"{m['store']}(&{self.addr(r)}, {v(ins.src)});")
            elif r.dir == HOR:
                ln(depth, f"{m['maskstore']}(&{self.addr(r)}, "
                   f"slingen_mask({ins.lanes}), {v(ins.src)});")
            else:
                for t in range(ins.lanes):
                    ln(depth, f"{self.addr(r, t)} = "
                       f"slingen_lane({v(ins.src)}, {t});")
        elif isinstance(ins, VBin):
            ln(depth, f"__m256d {v(ins.dst)} = "
               f"{m[ins.op]}({v(ins.a)}, {v(ins.b)});")
        elif isinstance(ins, VUn):
            if ins.op == "neg":
                ln(depth, f"__m256d {v(ins.dst)} = "
                   f"slingen_neg({v(ins.a)});")
            else:
                ln(depth, f"__m256d {v(ins.dst)} = "
                   f"{m['sqrt']}({v(ins.a)});")
        elif isinstance(ins, VBroadcast):
            ln(depth, f"__m256d {v(ins.dst)} = "
               f"{m['broadcast']}({v(ins.src)});")
        elif isinstance(ins, VReduce):
            expr = " + ".join(f"slingen_lane({v(ins.src)}, {t})"
                              for t in range(ins.lanes))
            ln(depth, f"double {v(ins.dst)} = {expr};")
        elif isinstance(ins, VExtract):
            ln(depth, f"double {v(ins.dst)} = "
               f"slingen_lane({v(ins.src)}, {ins.lane});")
        elif isinstance(ins, VBlend):
            picks = list(ins.picks) + [(0, 0)] * (4 - len(ins.picks))
            if all(l == t for t, (_, l) in enumerate(ins.picks)):
                imm = sum(which << t for t, (which, _) in enumerate(picks))
                ln(depth, f"__m256d {v(ins.dst)} = "
                   f"{m['blend']}({v(ins.a)}, {v(ins.b)}, {imm});")
            else:
                args = ", ".join(f"{w}, {l}" for (w, l) in picks)
                ln(depth, f"__m256d {v(ins.dst)} = "
                   f"slingen_blend({v(ins.a)}, {v(ins.b)}, {args});")
        elif isinstance(ins, VShuffle):
            sel = list(ins.sel) + [0] * (4 - len(ins.sel))
            args = ", ".join(str(s) for s in sel)
            ln(depth, f"__m256d {v(ins.dst)} = "
               f"slingen_shuffle({v(ins.a)}, {args});")
        else:
            self.common_instr(ins, depth, self.vec_instr)

    # ---- shared scalar/control instructions ----

    def common_instr(self, ins, depth: int, recurse) -> None:
        ln = self.line
        v = self.v
        if isinstance(ins, SLoad):
            ln(depth, f"double {v(ins.dst)} = {self.addr(ins.region)};")
        elif isinstance(ins, SStore):
            ln(depth, f"{self.addr(ins.region)} = {v(ins.src)};")
        elif isinstance(ins, SBin):
            ln(depth, f"double {v(ins.dst)} = "
               f"{v(ins.a)} {_BIN[ins.op]} {v(ins.b)};")
        elif isinstance(ins, SUn):
            rhs = f"-{v(ins.a)}" if ins.op == "neg" else f"sqrt({v(ins.a)})"
            ln(depth, f"double {v(ins.dst)} = {rhs};")
        elif isinstance(ins, SConst):
            ln(depth, f"double {v(ins.dst)} = {_c_float(ins.value)};")
        elif isinstance(ins, Loop):
            ln(depth, f"for (int {ins.var} = {_aff(ins.lo)}; "
               f"{ins.var} < {_aff(ins.hi)}; {ins.var} += {ins.step}) {{")
            for sub in ins.body:
                recurse(sub, depth + 1)
            ln(depth, "}")
        elif isinstance(ins, If):
            ln(depth, f"if (({_aff(ins.cond)}) > 0) {{")
            for sub in ins.body:
                recurse(sub, depth + 1)
            ln(depth, "}")
        else:
            raise EmitError(f"unsupported instruction {ins!r}")

    def body(self) -> str:
        emit = self.scalar_instr if self.isa.name == "scalar" \
            else self.vec_instr
        for name, (r, c) in self.fn.temps.items():
            self.line(1, f"double {name}[{r * c}] = {{0}};")
        for ins in self.fn.body:
            emit(ins, 1)
        return "\n".join(self.lines)


def _signature(fn: CIRFunction) -> str:
    parts = []
    for p in fn.params:
        const = "const " if p.iotype == "In" else ""
        parts.append(f"{const}double* restrict {p.name}")
    return f"void {fn.name}({', '.join(parts)})"


_CODELETS_SCALAR = """\
#ifndef SLINGEN_CODELETS_H
#define SLINGEN_CODELETS_H

#include <math.h>

/* scalar profile: vector instructions expand to per-lane doubles;
   no further support code is required */

#endif /* SLINGEN_CODELETS_H */
"""

_CODELETS_VEC256 = """\
#ifndef SLINGEN_CODELETS_H
#define SLINGEN_CODELETS_H

#include <math.h>
#include <immintrin.h>

/* lane mask for partial (masked) loads and stores of n < 4 lanes */
static inline __m256i slingen_mask(int n) {
    return _mm256_set_epi64x(n > 3 ? -1LL : 0, n > 2 ? -1LL : 0,
                             n > 1 ? -1LL : 0, -1LL);
}

static inline double slingen_lane(__m256d v, int i) {
    double t[4];
    _mm256_storeu_pd(t, v);
    return t[i];
}

static inline __m256d slingen_neg(__m256d v) {
    return _mm256_xor_pd(v, _mm256_set1_pd(-0.0));
}

/* generalized two-source blend: lane t takes lane l<t> of source s<t> */
static inline __m256d slingen_blend(__m256d a, __m256d b,
                                    int s0, int l0, int s1, int l1,
                                    int s2, int l2, int s3, int l3) {
    return _mm256_set_pd(slingen_lane(s3 ? b : a, l3),
                         slingen_lane(s2 ? b : a, l2),
                         slingen_lane(s1 ? b : a, l1),
                         slingen_lane(s0 ? b : a, l0));
}

static inline __m256d slingen_shuffle(__m256d a,
                                      int l0, int l1, int l2, int l3) {
    return _mm256_set_pd(slingen_lane(a, l3), slingen_lane(a, l2),
                         slingen_lane(a, l1), slingen_lane(a, l0));
}

#endif /* SLINGEN_CODELETS_H */
"""


def _header(fn: CIRFunction, sig: str, provenance: dict) -> str:
    guard = f"SLINGEN_{fn.name.upper()}_H"
    lines = [f"#ifndef {guard}", f"#define {guard}", ""]
    lines.append("/* Calling contract:")
    lines.append(" *   all operands row-major, leading dimension = "
                 "declared column count;")
    lines.append(" *   no parameter aliases another "
                 "(overwritten operands share one parameter).")
    for p in fn.params:
        lines.append(f" *   {p.name}: {p.rows}x{p.cols} {p.iotype}")
    lines.append(" */")
    lines.append(f"{sig};")
    lines.append("")
    lines.append(f"#endif /* {guard} */")
    return "\n".join(lines) + "\n"


def emit(fn: CIRFunction, isa: IsaProfile,
         provenance: dict | None = None) -> EmittedSource:
    """Unparse a function to C sources for the given profile."""
    provenance = provenance or {}
    sig = _signature(fn)
    head = [
        "/*",
        f" * generated by slingen {provenance.get('version', 'dev')}",
        f" * source sha256: {provenance.get('source_hash', 'unknown')}",
        f" * variant: {provenance.get('variant', 'default')}",
        f" * isa: {isa.name}",
        " */",
        "",
        '#include "codelets.h"',
        f'#include "{fn.name}.h"',
        "",
        sig + " {",
    ]
    body = _Emitter(fn, isa).body()
    text = "\n".join(head) + "\n" + body + "\n}\n"
    codelets = _CODELETS_SCALAR if isa.name == "scalar" else _CODELETS_VEC256
    files = {
        f"{fn.name}.c": text,
        f"{fn.name}.h": _header(fn, sig, provenance),
        "codelets.h": codelets,
    }
    return EmittedSource(files, sig, tuple(isa.flags),
                         main_file=f"{fn.name}.c")


def write_sources(src: EmittedSource, outdir) -> list[str]:
    """Write emitted files into a directory; returns the paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = []
    for name, text in sorted(src.files.items()):
        path = os.path.join(outdir, name)
        with open(path, "w") as f:
            f.write(text)
        paths.append(path)
    return paths
