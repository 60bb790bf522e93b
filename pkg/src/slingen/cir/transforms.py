"""IR transformations.

All transformations are bit-preserving: they replace memory traffic
with the exact values that traffic would move and never reassociate
arithmetic.  Values are expected in single-assignment form, which the
builder guarantees; unrolled loop bodies are renamed per trip to keep
that property.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..affine import Aff
from .ir import (
    CIRFunction,
    If,
    Instr,
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

DEFAULT_MAX_TRIPS = 8


def _defs(ins: Instr) -> list[str]:
    if isinstance(ins, (VLoad, VBin, VUn, VBroadcast, VReduce, VExtract,
                        VBlend, VShuffle, SLoad, SBin, SUn, SConst)):
        return [ins.dst]
    return []


def _uses(ins: Instr) -> tuple[str, ...]:
    if isinstance(ins, (VBin, SBin, VBlend)):
        return (ins.a, ins.b)
    if isinstance(ins, (VUn, SUn, VShuffle)):
        return (ins.a,)
    if isinstance(ins, (VBroadcast, VReduce, VExtract, VStore, SStore)):
        return (ins.src,)
    return ()


def _rename_uses(ins: Instr, f) -> Instr:
    if isinstance(ins, (VBin, SBin)):
        return replace(ins, a=f(ins.a), b=f(ins.b))
    if isinstance(ins, (VUn, SUn, VShuffle)):
        return replace(ins, a=f(ins.a))
    if isinstance(ins, VBlend):
        return replace(ins, a=f(ins.a), b=f(ins.b))
    if isinstance(ins, (VBroadcast, VReduce, VExtract, VStore, SStore)):
        return replace(ins, src=f(ins.src))
    return ins


def _fast_rename(ins: Instr, rename: dict[str, str], rn) -> Instr:
    if any(u in rename for u in _uses(ins)):
        return _rename_uses(ins, rn)
    return ins


def _subst_region(r: MemRegion, env: dict[str, Aff]) -> MemRegion:
    return replace(r, row=r.row.subst(env), col=r.col.subst(env))


def _subst_instr(ins: Instr, env: dict[str, Aff], rn) -> Instr:
    ins = _rename_uses(ins, rn)
    d = _defs(ins)
    if d:
        ins = replace(ins, dst=rn(d[0]))
    if isinstance(ins, (VLoad, VStore, SLoad, SStore)):
        ins = replace(ins, region=_subst_region(ins.region, env))
    return ins


def _body_defs(instrs) -> set[str]:
    out: set[str] = set()
    for ins in instrs:
        out.update(_defs(ins))
        if isinstance(ins, (Loop, If)):
            out.update(_body_defs(ins.body))
    return out


class _Unroller:
    def __init__(self, max_trips: int):
        self.max_trips = max_trips
        self._copy = 0

    def run(self, instrs, env: dict[str, Aff]) -> list[Instr]:
        out: list[Instr] = []
        for ins in instrs:
            if isinstance(ins, Loop):
                out.extend(self._loop(ins, env))
            elif isinstance(ins, If):
                cond = ins.cond.subst(env)
                if cond.is_const:
                    if cond.const > 0:
                        out.extend(self.run(ins.body, env))
                else:
                    out.append(If(cond, tuple(self.run(ins.body, env))))
            else:
                out.append(_subst_instr(ins, env, lambda n: n))
        return out

    def _loop(self, loop: Loop, env: dict[str, Aff]) -> list[Instr]:
        lo = loop.lo.subst(env)
        hi = loop.hi.subst(env)
        if not (lo.is_const and hi.is_const):
            body = tuple(self.run(loop.body, env))
            return [Loop(loop.var, lo, hi, loop.step, body)]
        trips = range(lo.const, hi.const, loop.step)
        if len(trips) > self.max_trips:
            body = tuple(self.run(loop.body, env))
            return [Loop(loop.var, lo, hi, loop.step, body)]
        local = _body_defs(loop.body)
        out: list[Instr] = []
        for v in trips:
            tag = self._copy
            self._copy += 1

            def rn(name: str, _tag=tag) -> str:
                return f"{name}_u{_tag}" if name in local else name

            trip_env = {**env, loop.var: Aff(v)}
            for ins in loop.body:
                if isinstance(ins, (Loop, If)):
                    out.extend(self.run([_rename_body(ins, rn)], trip_env))
                else:
                    out.append(_subst_instr(ins, trip_env, rn))
        return out


def _rename_body(ins, rn):
    body = tuple(
        _rename_body(s, rn) if isinstance(s, (Loop, If))
        else _subst_instr(s, {}, rn)
        for s in ins.body)
    return replace(ins, body=body)


def _positions(r: MemRegion) -> Optional[list[tuple[str, int, int]]]:
    if not (r.row.is_const and r.col.is_const):
        return None
    return [(r.name,) + p for p in r.positions({})]


def _scalarize(instrs: list[Instr]) -> list[Instr]:
    """Reuse values of repeated loads from unmodified locations."""
    rename: dict[str, str] = {}

    def rn(name: str) -> str:
        while name in rename:
            name = rename[name]
        return name

    avail: dict[tuple, str] = {}      # (kind, positions...) -> value
    by_pos: dict[tuple, set] = {}     # position -> keys reading it
    out: list[Instr] = []

    def index(key) -> None:
        for p in key[1]:
            by_pos.setdefault(p, set()).add(key)

    for ins in instrs:
        ins = _fast_rename(ins, rename, rn)
        if isinstance(ins, (Loop, If)):
            avail.clear()
            by_pos.clear()
            out.append(ins)
            continue
        if isinstance(ins, (VLoad, SLoad)):
            pos = _positions(ins.region)
            if pos is None:
                out.append(ins)
                continue
            kind = "v" if isinstance(ins, VLoad) else "s"
            key = (kind, tuple(pos))
            if key in avail:
                rename[ins.dst] = avail[key]
                continue
            avail[key] = ins.dst
            index(key)
            out.append(ins)
            continue
        if isinstance(ins, (VStore, SStore)):
            pos = _positions(ins.region)
            if pos is None:
                # unknown target: discard knowledge about this buffer
                avail = {k: v for k, v in avail.items()
                         if all(p[0] != ins.region.name for p in k[1])}
                by_pos.clear()
                for k in avail:
                    index(k)
            else:
                for p in pos:
                    for k in by_pos.pop(p, ()):
                        avail.pop(k, None)
                kind = "v" if isinstance(ins, VStore) else "s"
                key = (kind, tuple(pos))
                avail[key] = ins.src
                index(key)
            out.append(ins)
            continue
        out.append(ins)
    return out


def unroll_and_scalarize(fn: CIRFunction,
                         max_trips: int = DEFAULT_MAX_TRIPS) -> CIRFunction:
    """Fully unroll short constant-trip loops, then reuse repeated loads.

    Loops longer than max_trips (or with symbolic bounds) are kept;
    value reuse stops at any remaining control flow.
    """
    if any(isinstance(i, (Loop, If)) for i in fn.body):
        body = _Unroller(max_trips).run(fn.body, {})
    else:
        body = list(fn.body)
    body = _scalarize(body)
    return CIRFunction(fn.name, fn.params, dict(fn.temps), body, fn.nu)


@dataclass
class LoadStoreReport:
    forwarded_vector: int = 0
    forwarded_scalar: int = 0
    blends: int = 0
    shuffles: int = 0
    extracts: int = 0
    reloads: int = 0          # kept loads fully covered by known stores
    loads_kept: int = 0
    dead_stores: int = 0
    notes: list = field(default_factory=list)


def _forward_vload(ins: VLoad, producers, out, report):
    """Replace a fully covered vector load; returns the value name or
    None when the load must stay."""
    kinds = {p[0] for p in producers}
    if kinds != {"v"}:
        return None
    sources: list[str] = []
    for name, _ in (p[1:] for p in producers):
        if name not in sources:
            sources.append(name)
    if len(sources) == 1:
        name = sources[0]
        lanes = tuple(p[2] for p in producers)
        if lanes == tuple(range(len(producers))):
            report.forwarded_vector += 1
            return name
        out.append(VShuffle(ins.dst, name, lanes))
        report.shuffles += 1
        return ins.dst
    if len(sources) == 2:
        picks = tuple((sources.index(p[1]), p[2]) for p in producers)
        out.append(VBlend(ins.dst, sources[0], sources[1], picks))
        report.blends += 1
        return ins.dst
    return None


def loadstore_analysis(fn: CIRFunction):
    """Forward stored values into later loads; drop unobserved stores.

    A vector load whose lanes were all produced by earlier vector
    stores becomes a value reuse, a lane shuffle of one source, or a
    blend of two sources; a scalar load of a stored vector lane becomes
    an extract.  Loads that mix more than two sources or scalar and
    vector producers are kept (conservative).  Stores to local
    temporaries that no remaining load observes are removed.  Returns
    the transformed function and a report.
    """
    report = LoadStoreReport()
    rename: dict[str, str] = {}

    def rn(name: str) -> str:
        while name in rename:
            name = rename[name]
        return name

    last: dict[tuple, tuple] = {}     # (buf, r, c) -> producer
    out: list[Instr] = []
    has_flow = False
    for ins in fn.body:
        ins = _fast_rename(ins, rename, rn)
        if isinstance(ins, (Loop, If)):
            last.clear()
            has_flow = True
            out.append(ins)
            continue
        if isinstance(ins, VLoad):
            pos = _positions(ins.region)
            producers = None
            if pos is not None and all(p in last for p in pos):
                producers = [last[p] for p in pos]
            if producers is None:
                out.append(ins)
                continue
            fwd = _forward_vload(ins, producers, out, report)
            if fwd is None:
                report.reloads += 1
                out.append(ins)
            elif fwd != ins.dst:
                rename[ins.dst] = fwd
            continue
        if isinstance(ins, SLoad):
            pos = _positions(ins.region)
            p = last.get(pos[0]) if pos else None
            if p is None:
                out.append(ins)
            elif p[0] == "s":
                rename[ins.dst] = p[1]
                report.forwarded_scalar += 1
            else:
                out.append(VExtract(ins.dst, p[1], p[2]))
                report.extracts += 1
            continue
        if isinstance(ins, VStore):
            pos = _positions(ins.region)
            if pos is None:
                last = {k: v for k, v in last.items()
                        if k[0] != ins.region.name}
            else:
                for t, p in enumerate(pos):
                    last[p] = ("v", ins.src, t)
            out.append(ins)
            continue
        if isinstance(ins, SStore):
            pos = _positions(ins.region)
            if pos is None:
                last = {k: v for k, v in last.items()
                        if k[0] != ins.region.name}
            else:
                last[pos[0]] = ("s", ins.src)
            out.append(ins)
            continue
        out.append(ins)

    if not has_flow:
        out = _eliminate_dead_stores(out, set(fn.temps), report)
    new = CIRFunction(fn.name, fn.params, dict(fn.temps), out, fn.nu)
    return new, report


def _eliminate_dead_stores(instrs: list[Instr], temp_bufs: set[str],
                           report: LoadStoreReport) -> list[Instr]:
    """Drop stores to temporaries whose cells are never loaded later."""
    needed: set[tuple] = set()
    kept_rev: list[Instr] = []
    for ins in reversed(instrs):
        if isinstance(ins, (VLoad, SLoad)):
            pos = _positions(ins.region)
            if ins.region.name in temp_bufs and pos is not None:
                needed.update(pos)
            report.loads_kept += 1
        elif isinstance(ins, (VStore, SStore)):
            pos = _positions(ins.region)
            if ins.region.name in temp_bufs and pos is not None:
                if not needed & set(pos):
                    report.dead_stores += 1
                    continue
                needed -= set(pos)
        kept_rev.append(ins)
    return list(reversed(kept_rev))
