"""Instruction set of the C-like IR.

Values are named SSA-style registers: vector values hold a fixed lane
count, scalar values hold one double.  Memory is addressed by regions
of named buffers; offsets are affine in enclosing loop variables so
straight-line code has constant addresses.  Every arithmetic
instruction carries an ``active`` lane count used by the flop counter
when some lanes are known to combine structural zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..affine import Aff

HOR = "hor"
VERT = "vert"


@dataclass(frozen=True)
class MemRegion:
    """count consecutive elements of a buffer along one direction."""

    name: str
    row: Aff
    col: Aff
    count: int
    dir: str = HOR

    def positions(self, env: dict[str, int]) -> list[tuple[int, int]]:
        r = self.row.eval(env)
        c = self.col.eval(env)
        if self.dir == HOR:
            return [(r, c + t) for t in range(self.count)]
        return [(r + t, c) for t in range(self.count)]


@dataclass(frozen=True)
class VLoad:
    dst: str
    region: MemRegion

    @property
    def lanes(self) -> int:
        return self.region.count


@dataclass(frozen=True)
class VStore:
    region: MemRegion
    src: str

    @property
    def lanes(self) -> int:
        return self.region.count


@dataclass(frozen=True)
class VBin:
    dst: str
    op: str               # add sub mul div
    a: str
    b: str
    lanes: int
    active: Optional[int] = None  # lanes charged as flops (default: all)


@dataclass(frozen=True)
class VUn:
    dst: str
    op: str               # neg sqrt
    a: str
    lanes: int
    active: Optional[int] = None


@dataclass(frozen=True)
class VBroadcast:
    dst: str
    src: str              # scalar value
    lanes: int


@dataclass(frozen=True)
class VReduce:
    """Sequential left-to-right sum of the lanes of a vector value."""

    dst: str              # scalar value
    src: str
    lanes: int
    active: Optional[int] = None


@dataclass(frozen=True)
class VExtract:
    dst: str              # scalar value
    src: str
    lane: int


@dataclass(frozen=True)
class VBlend:
    """Per-lane pick from two source vectors.

    picks[t] = (which, lane): lane of the first (0) or second (1)
    source feeding output lane t.
    """

    dst: str
    a: str
    b: str
    picks: tuple[tuple[int, int], ...]

    @property
    def lanes(self) -> int:
        return len(self.picks)


@dataclass(frozen=True)
class VShuffle:
    """Single-source lane permutation/selection."""

    dst: str
    a: str
    sel: tuple[int, ...]

    @property
    def lanes(self) -> int:
        return len(self.sel)


@dataclass(frozen=True)
class SLoad:
    dst: str
    region: MemRegion     # count == 1


@dataclass(frozen=True)
class SStore:
    region: MemRegion     # count == 1
    src: str


@dataclass(frozen=True)
class SBin:
    dst: str
    op: str               # add sub mul div
    a: str
    b: str


@dataclass(frozen=True)
class SUn:
    dst: str
    op: str               # neg sqrt
    a: str


@dataclass(frozen=True)
class SConst:
    dst: str
    value: float


@dataclass(frozen=True)
class Loop:
    """for var = lo; var < hi; var += step."""

    var: str
    lo: Aff
    hi: Aff
    step: int
    body: tuple["Instr", ...]


@dataclass(frozen=True)
class If:
    """Executes the body when the affine condition is positive."""

    cond: Aff
    body: tuple["Instr", ...]


Instr = Union[VLoad, VStore, VBin, VUn, VBroadcast, VReduce, VExtract,
              VBlend, VShuffle, SLoad, SStore, SBin, SUn, SConst, Loop, If]


@dataclass(frozen=True)
class Param:
    name: str
    rows: int
    cols: int
    iotype: str           # "In" | "Out" | "InOut"


@dataclass
class CIRFunction:
    name: str
    params: list[Param]
    temps: dict[str, tuple[int, int]] = field(default_factory=dict)
    body: list[Instr] = field(default_factory=list)
    nu: int = 4

    def walk(self) -> Iterator[Instr]:
        def rec(instrs) -> Iterator[Instr]:
            for ins in instrs:
                yield ins
                if isinstance(ins, (Loop, If)):
                    yield from rec(ins.body)
        yield from rec(self.body)


def _reg(r: MemRegion) -> str:
    d = "h" if r.dir == HOR else "v"
    return f"{r.name}[{r.row},{r.col}]{d}{r.count}"


def _line(ins: Instr) -> str:
    if isinstance(ins, VLoad):
        return f"{ins.dst} = vload {_reg(ins.region)}"
    if isinstance(ins, VStore):
        return f"vstore {_reg(ins.region)}, {ins.src}"
    if isinstance(ins, VBin):
        act = "" if ins.active is None else f" !{ins.active}"
        return f"{ins.dst} = v{ins.op}.{ins.lanes} {ins.a}, {ins.b}{act}"
    if isinstance(ins, VUn):
        act = "" if ins.active is None else f" !{ins.active}"
        return f"{ins.dst} = v{ins.op}.{ins.lanes} {ins.a}{act}"
    if isinstance(ins, VBroadcast):
        return f"{ins.dst} = vbcast.{ins.lanes} {ins.src}"
    if isinstance(ins, VReduce):
        return f"{ins.dst} = vreduce.{ins.lanes} {ins.src}"
    if isinstance(ins, VExtract):
        return f"{ins.dst} = vextract {ins.src}[{ins.lane}]"
    if isinstance(ins, VBlend):
        picks = " ".join(f"{'ab'[w]}{l}" for (w, l) in ins.picks)
        return f"{ins.dst} = vblend {ins.a}, {ins.b} [{picks}]"
    if isinstance(ins, VShuffle):
        sel = " ".join(str(s) for s in ins.sel)
        return f"{ins.dst} = vshuffle {ins.a} [{sel}]"
    if isinstance(ins, SLoad):
        return f"{ins.dst} = sload {_reg(ins.region)}"
    if isinstance(ins, SStore):
        return f"sstore {_reg(ins.region)}, {ins.src}"
    if isinstance(ins, SBin):
        return f"{ins.dst} = s{ins.op} {ins.a}, {ins.b}"
    if isinstance(ins, SUn):
        return f"{ins.dst} = s{ins.op} {ins.a}"
    if isinstance(ins, SConst):
        return f"{ins.dst} = sconst {ins.value!r}"
    raise TypeError(type(ins).__name__)


def dump(fn: CIRFunction) -> str:
    """Readable text form of a function (for --dump-cir)."""
    out = [f"function {fn.name} (nu={fn.nu})"]
    for p in fn.params:
        out.append(f"  param {p.name} {p.rows}x{p.cols} {p.iotype}")
    for name, (r, c) in fn.temps.items():
        out.append(f"  temp {name} {r}x{c}")

    def emit(instrs, depth) -> None:
        pad = "  " * depth
        for ins in instrs:
            if isinstance(ins, Loop):
                out.append(f"{pad}for {ins.var} = {ins.lo} .. {ins.hi} "
                           f"step {ins.step}:")
                emit(ins.body, depth + 1)
            elif isinstance(ins, If):
                out.append(f"{pad}if {ins.cond} > 0:")
                emit(ins.body, depth + 1)
            else:
                out.append(pad + _line(ins))

    emit(fn.body, 1)
    return "\n".join(out) + "\n"
