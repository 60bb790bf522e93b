"""The compilation pipeline for one variant.

Front end output goes through lowering (blocked algorithm per implicit
equation), scalar packing, tiling to codelet calls, IR expansion, and
the bit-preserving IR optimizations; the result carries everything the
measurement and emission stages need.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .. import __version__
from ..backend import EmittedSource, emit, profile_by_name
from ..cir import (
    CIRFunction,
    count_flops,
    count_ops,
    loadstore_analysis,
    to_cir,
    unroll_and_scalarize,
)
from ..frontend.astnodes import CheckedProgram
from ..synthesis.lower import lower
from ..tiling import TiledProgram, pack_scalars, tile_program
from .variants import VariantConfig


@dataclass
class CompiledVariant:
    config: VariantConfig
    tiled: TiledProgram
    raw: CIRFunction
    optimized: CIRFunction
    flops: int
    ops: int


def compile_variant(cp: CheckedProgram,
                    config: VariantConfig) -> CompiledVariant:
    bp = lower(cp, choices=config.invariants, blocksize=config.blocksize)
    packed, _ = pack_scalars(bp)
    tp = tile_program(packed, nu=config.nu)
    raw = to_cir(tp)
    opt, _ = loadstore_analysis(
        unroll_and_scalarize(raw, max_trips=config.unroll))
    return CompiledVariant(config, tp, raw, opt,
                           flops=count_flops(opt), ops=count_ops(opt))


def source_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def emit_variant(cv: CompiledVariant, la_source: str) -> EmittedSource:
    isa = profile_by_name(cv.config.isa)
    return emit(cv.optimized, isa, {
        "version": __version__,
        "source_hash": source_hash(la_source),
        "variant": cv.config.id,
    })
