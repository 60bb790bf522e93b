"""Reference execution of the IR by compilation to Python.

Every vector lane becomes a separate Python float variable, so the
interpreter fixes one exact evaluation order per instruction; backends
that follow the same order reproduce it bit for bit.  The flop count
is static: it walks the instruction list (executing loop and branch
structure symbolically) and charges each arithmetic instruction its
active lane count.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..affine import Aff
from .ir import (
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

_BIN = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _aff_expr(a: Aff) -> str:
    return str(a) if a.terms else str(a.const)


class _Codegen:
    def __init__(self, fn: CIRFunction):
        self.fn = fn
        self.dims = {p.name: (p.rows, p.cols) for p in fn.params}
        self.dims.update(fn.temps)
        self.lines: list[str] = []

    def _indices(self, r: MemRegion) -> list[str]:
        _, cols = self.dims[r.name]
        const = r.row.is_const and r.col.is_const
        out = []
        for t in range(r.count):
            dr, dc = (0, t) if r.dir == HOR else (t, 0)
            if const:
                out.append(str((r.row.const + dr) * cols + r.col.const + dc))
            else:
                out.append(f"({_aff_expr(r.row + dr)})*{cols}"
                           f"+({_aff_expr(r.col + dc)})")
        return out

    def line(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    def instr(self, ins, depth: int) -> None:
        ln = self.line
        if isinstance(ins, VLoad):
            for t, ix in enumerate(self._indices(ins.region)):
                ln(depth, f"{ins.dst}_{t} = B_{ins.region.name}[{ix}]")
        elif isinstance(ins, VStore):
            for t, ix in enumerate(self._indices(ins.region)):
                ln(depth, f"B_{ins.region.name}[{ix}] = {ins.src}_{t}")
        elif isinstance(ins, VBin):
            op = _BIN[ins.op]
            for t in range(ins.lanes):
                ln(depth, f"{ins.dst}_{t} = {ins.a}_{t} {op} {ins.b}_{t}")
        elif isinstance(ins, VUn):
            for t in range(ins.lanes):
                if ins.op == "neg":
                    ln(depth, f"{ins.dst}_{t} = -{ins.a}_{t}")
                else:
                    ln(depth, f"{ins.dst}_{t} = sqrt({ins.a}_{t})")
        elif isinstance(ins, VBroadcast):
            for t in range(ins.lanes):
                ln(depth, f"{ins.dst}_{t} = {ins.src}")
        elif isinstance(ins, VReduce):
            ln(depth, f"{ins.dst} = "
               + " + ".join(f"{ins.src}_{t}" for t in range(ins.lanes)))
        elif isinstance(ins, VExtract):
            ln(depth, f"{ins.dst} = {ins.src}_{ins.lane}")
        elif isinstance(ins, VBlend):
            for t, (which, lane) in enumerate(ins.picks):
                src = ins.a if which == 0 else ins.b
                ln(depth, f"{ins.dst}_{t} = {src}_{lane}")
        elif isinstance(ins, VShuffle):
            for t, lane in enumerate(ins.sel):
                ln(depth, f"{ins.dst}_{t} = {ins.a}_{lane}")
        elif isinstance(ins, SLoad):
            ix = self._indices(ins.region)[0]
            ln(depth, f"{ins.dst} = B_{ins.region.name}[{ix}]")
        elif isinstance(ins, SStore):
            ix = self._indices(ins.region)[0]
            ln(depth, f"B_{ins.region.name}[{ix}] = {ins.src}")
        elif isinstance(ins, SBin):
            ln(depth, f"{ins.dst} = {ins.a} {_BIN[ins.op]} {ins.b}")
        elif isinstance(ins, SUn):
            if ins.op == "neg":
                ln(depth, f"{ins.dst} = -{ins.a}")
            else:
                ln(depth, f"{ins.dst} = sqrt({ins.a})")
        elif isinstance(ins, SConst):
            ln(depth, f"{ins.dst} = {ins.value!r}")
        elif isinstance(ins, Loop):
            ln(depth, f"for {ins.var} in range({_aff_expr(ins.lo)}, "
               f"{_aff_expr(ins.hi)}, {ins.step}):")
            if not ins.body:
                ln(depth + 1, "pass")
            for sub in ins.body:
                self.instr(sub, depth + 1)
        elif isinstance(ins, If):
            ln(depth, f"if ({_aff_expr(ins.cond)}) > 0:")
            if not ins.body:
                ln(depth + 1, "pass")
            for sub in ins.body:
                self.instr(sub, depth + 1)
        else:
            raise TypeError(type(ins).__name__)

    def source(self) -> str:
        self.line(0, "def _run(_buffers):")
        for p in self.fn.params:
            self.line(1, f"B_{p.name} = _buffers[{p.name!r}]")
        for name, (r, c) in self.fn.temps.items():
            self.line(1, f"B_{name} = [0.0] * {r * c}")
        if not self.fn.body:
            self.line(1, "pass")
        for ins in self.fn.body:
            self.instr(ins, 1)
        return "\n".join(self.lines) + "\n"


def make_runner(fn: CIRFunction) -> Callable[[dict], None]:
    """Compile a function to Python; the runner mutates buffer lists."""
    src = _Codegen(fn).source()
    ns = {"sqrt": math.sqrt}
    exec(compile(src, f"<cir:{fn.name}>", "exec"), ns)
    return ns["_run"]


def interpret(fn: CIRFunction,
              inputs: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Run a function on the given inputs; returns every parameter.

    Read-only parameters come back unchanged; missing writable
    parameters start zeroed.  Operands merged into a parent buffer by
    overwriting are read from the parent's entry of the result.
    """
    buffers: dict[str, list] = {}
    for p in fn.params:
        if p.name in inputs:
            a = np.asarray(inputs[p.name], dtype=float)
            if a.shape != (p.rows, p.cols):
                raise ValueError(
                    f"{p.name}: expected {(p.rows, p.cols)}, got {a.shape}")
            buffers[p.name] = [float(x) for x in a.reshape(-1)]
        else:
            buffers[p.name] = [0.0] * (p.rows * p.cols)
    make_runner(fn)(buffers)
    return {p.name: np.array(buffers[p.name]).reshape(p.rows, p.cols)
            for p in fn.params}


def _flops_of(ins) -> int:
    if isinstance(ins, VBin):
        return ins.active if ins.active is not None else ins.lanes
    if isinstance(ins, VUn):
        if ins.op == "neg":
            return 0
        return ins.active if ins.active is not None else ins.lanes
    if isinstance(ins, VReduce):
        n = ins.active if ins.active is not None else ins.lanes
        return max(n - 1, 0)
    if isinstance(ins, SBin):
        return 1
    if isinstance(ins, SUn):
        return 0 if ins.op == "neg" else 1
    return 0


def count_ops(fn: CIRFunction) -> int:
    """Executed instruction count (the simulated-cycle measure)."""

    def rec(instrs, env: dict[str, int]) -> int:
        total = 0
        for ins in instrs:
            if isinstance(ins, Loop):
                for v in range(ins.lo.eval(env), ins.hi.eval(env), ins.step):
                    total += rec(ins.body, {**env, ins.var: v})
            elif isinstance(ins, If):
                if ins.cond.eval(env) > 0:
                    total += rec(ins.body, env)
            else:
                total += 1
        return total

    return rec(fn.body, {})


def count_flops(fn: CIRFunction) -> int:
    """Static flop count; loops and branches are walked structurally."""

    def rec(instrs, env: dict[str, int]) -> int:
        total = 0
        for ins in instrs:
            if isinstance(ins, Loop):
                for v in range(ins.lo.eval(env), ins.hi.eval(env), ins.step):
                    total += rec(ins.body, {**env, ins.var: v})
            elif isinstance(ins, If):
                if ins.cond.eval(env) > 0:
                    total += rec(ins.body, env)
            else:
                total += _flops_of(ins)
        return total

    return rec(fn.body, {})
