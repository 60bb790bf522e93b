"""Measurement, selection, and the tune report.

The default timing source is simulated: one "cycle" per executed IR
instruction, so tuning runs without a C toolchain and is perfectly
reproducible.  A hardware timing source is any callable returning one
cycle count per repetition.  Selection is a pure function of the
recorded measurements: minimal median, ties to the lexicographically
smallest variant id.
"""

from __future__ import annotations

import json
import platform
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..frontend.astnodes import CheckedProgram
from .pipeline import CompiledVariant, compile_variant
from .variants import VariantConfig

DEFAULT_REPS = 30
DEFAULT_PEAK = 8.0   # flops per cycle


class TuneError(Exception):
    """No variant produced a usable measurement."""


@dataclass
class Measurement:
    variant_id: str
    config: str
    cycles: list[float]
    median_cycles: float
    q1: float
    q3: float
    flops: int
    f_per_c: float


@dataclass
class TuneReport:
    program: str
    host: str
    isa: str
    nu: int
    variants: list[Measurement]
    selected: str
    timing_source: str
    notes: list[str] = field(default_factory=list)


def _quartiles(xs: Sequence[float]) -> tuple[float, float, float]:
    s = sorted(xs)
    med = statistics.median(s)
    half = len(s) // 2
    lower = s[:half]
    upper = s[-half:] if half else s
    q1 = statistics.median(lower) if lower else med
    q3 = statistics.median(upper) if upper else med
    return q1, med, q3


def measure(cv: CompiledVariant, reps: int,
            timing: Optional[Callable] = None) -> Measurement:
    """One variant's cycle counts; simulated when no timer is given."""
    if timing is None:
        cycles = [float(cv.ops)] * reps
    else:
        cycles = [float(c) for c in timing(cv, reps)]
        if len(cycles) < reps:
            raise ValueError(f"timer returned {len(cycles)} of {reps} reps")
    q1, med, q3 = _quartiles(cycles)
    return Measurement(cv.config.id, cv.config.canonical, cycles,
                       med, q1, q3, cv.flops,
                       cv.flops / med if med else 0.0)


def select(measurements: Sequence[Measurement]) -> str:
    """Minimal median cycles; ties go to the smallest variant id."""
    if not measurements:
        raise TuneError("no successful measurements")
    best = min(measurements, key=lambda m: (m.median_cycles, m.variant_id))
    return best.variant_id


def run_tune(cp: CheckedProgram, variants: Sequence[VariantConfig],
             reps: int = DEFAULT_REPS,
             timing: Optional[Callable] = None,
             timing_source: str = "simulated") -> TuneReport:
    """Compile and measure every variant sequentially, then select.

    A variant whose compilation or measurement fails is recorded in the
    notes and excluded; if all fail, TuneError.
    """
    measurements: list[Measurement] = []
    notes: list[str] = []
    isa = variants[0].isa if variants else "scalar"
    nu = variants[0].nu if variants else 4
    for cfg in variants:
        try:
            cv = compile_variant(cp, cfg)
            measurements.append(measure(cv, reps, timing))
        except Exception as exc:  # noqa: BLE001 - exclusion policy
            notes.append(f"variant {cfg.id} excluded: {exc}")
    selected = select(measurements)
    return TuneReport(cp.name, platform.node(), isa, nu,
                      measurements, selected, timing_source, notes)


def save_report(report: TuneReport, path) -> None:
    doc = {
        "program": report.program,
        "host": report.host,
        "isa": report.isa,
        "nu": report.nu,
        "variants": [
            {
                "id": m.variant_id,
                "config": m.config,
                "median_cycles": m.median_cycles,
                "q1": m.q1,
                "q3": m.q3,
                "flops": m.flops,
                "f_per_c": m.f_per_c,
            }
            for m in report.variants
        ],
        "selected": report.selected,
        "timing_source": report.timing_source,
    }
    if report.notes:
        doc["notes"] = report.notes
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=False)
        f.write("\n")


def load_report(path) -> TuneReport:
    with open(path) as f:
        doc = json.load(f)
    ms = [Measurement(v["id"], v["config"], [], v["median_cycles"],
                      v["q1"], v["q3"], v["flops"], v["f_per_c"])
          for v in doc["variants"]]
    return TuneReport(doc["program"], doc["host"], doc["isa"], doc["nu"],
                      ms, doc["selected"], doc["timing_source"],
                      doc.get("notes", []))
