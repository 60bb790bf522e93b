"""Numeric verification of generated code against the reference.

One verification run compiles a variant, interprets the optimized IR
on seeded random inputs, and checks outputs against the dense
reference (relative error) plus the defining-equation residuals of
every implicit equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cir import interpret, make_runner
from ..frontend.astnodes import CheckedProgram, OperandDecl
from ..oracle import (
    generate_inputs,
    output_names,
    reference_outputs,
    rel_error,
    residuals,
)
from .pipeline import CompiledVariant, compile_variant
from .variants import VariantConfig

OUTPUT_TOL = 1e-10
RESIDUAL_TOL = 1e-12


def masked(decl: OperandDecl, a: np.ndarray) -> np.ndarray:
    """Restrict a value to its declared triangular part."""
    if "UpTri" in decl.properties:
        return np.triu(a)
    if "LoTri" in decl.properties:
        return np.tril(a)
    return a


@dataclass
class VerifyResult:
    failures: list[str] = field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def run_values(cp: CheckedProgram, cv: CompiledVariant,
               inputs: dict[str, np.ndarray],
               runner=None) -> dict[str, np.ndarray]:
    """Final value of every non-temporary operand after interpretation.

    Overwritten operands read their shared buffer; their parents are
    not observable and are omitted.
    """
    if runner is None:
        results = interpret(cv.optimized, inputs)
    else:
        params = cv.optimized.params
        buffers = {}
        for p in params:
            a = inputs.get(p.name)
            buffers[p.name] = ([float(x) for x in
                                np.asarray(a, dtype=float).reshape(-1)]
                               if a is not None
                               else [0.0] * (p.rows * p.cols))
        runner(buffers)
        results = {p.name: np.array(buffers[p.name]).reshape(p.rows, p.cols)
                   for p in params}
    overwritten = {d.overwrites for d in cp.decls.values() if d.overwrites}
    out = {}
    for name, d in cp.decls.items():
        if name in overwritten:
            continue
        buf = d.overwrites or name
        while cp.decls[buf].overwrites:
            buf = cp.decls[buf].overwrites
        if buf in results:
            out[name] = results[buf]
    return out


def verify_variant(cp: CheckedProgram, config: VariantConfig,
                   seeds: range) -> VerifyResult:
    res = VerifyResult()
    cv = compile_variant(cp, config)
    runner = make_runner(cv.optimized)
    overwritten = {d.overwrites for d in cp.decls.values() if d.overwrites}
    for seed in seeds:
        inputs = generate_inputs(cp.decls, seed=seed)
        want = reference_outputs(cp, inputs)
        got = run_values(cp, cv, inputs, runner)
        for name in output_names(cp):
            if name in overwritten:
                continue
            d = cp.decls[name]
            err = rel_error(masked(d, got[name]), masked(d, want[name]))
            res.checks += 1
            if not err <= OUTPUT_TOL:
                res.failures.append(
                    f"{cp.name} seed={seed} {name}: rel error {err:.3e}")
        vals = dict(inputs)
        for name in output_names(cp):
            ref = want[name]
            vals[name] = ref if name in overwritten else \
                masked(cp.decls[name], got[name])
        for line, r in residuals(cp, vals).items():
            res.checks += 1
            if not r <= RESIDUAL_TOL:
                res.failures.append(
                    f"{cp.name} seed={seed} stmt@{line}: residual {r:.3e}")
    return res
