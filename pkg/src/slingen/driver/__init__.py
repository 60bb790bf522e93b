"""Orchestration: variant enumeration, measurement, tuning, CLI."""

from .variants import Limits, VariantConfig, enumerate_variants
from .pipeline import CompiledVariant, compile_variant
from .measure import (
    Measurement,
    TuneError,
    TuneReport,
    load_report,
    run_tune,
    save_report,
    select,
)
from .iofiles import FormatError, read_operands, write_operands

__all__ = [
    "CompiledVariant",
    "FormatError",
    "Limits",
    "Measurement",
    "TuneError",
    "TuneReport",
    "VariantConfig",
    "compile_variant",
    "enumerate_variants",
    "load_report",
    "read_operands",
    "run_tune",
    "save_report",
    "select",
    "write_operands",
]
