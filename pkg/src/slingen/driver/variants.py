"""Enumeration of implementation variants.

A variant fixes one blocked algorithm per implicit equation, one outer
block size, one unroll policy, and the ISA profile.  Enumeration order
is the deterministic cross-product order; the id is a canonical hash
of the configuration.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

from ..frontend.astnodes import CheckedProgram
from ..synthesis.lower import family_invariants, program_hlacs


@dataclass(frozen=True)
class Limits:
    max_variants: int = 256


@dataclass(frozen=True)
class VariantConfig:
    invariants: tuple[int, ...]   # invariant index per HLAC occurrence
    blocksize: int                # outer block size (nu or 2 nu)
    unroll: int                   # full-unroll trip limit
    isa: str
    nu: int = 4

    @property
    def canonical(self) -> str:
        inv = ",".join(str(i) for i in self.invariants)
        return (f"inv=[{inv}];b={self.blocksize};u={self.unroll};"
                f"isa={self.isa};nu={self.nu}")

    @property
    def id(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()[:16]


@dataclass
class VariantSpace:
    variants: list[VariantConfig]
    notes: list[str] = field(default_factory=list)


def enumerate_variants(cp: CheckedProgram, isa: str = "scalar", nu: int = 4,
                       unroll_policies: tuple[int, ...] = (8,),
                       limits: Limits = Limits()) -> VariantSpace:
    """Deterministic cross-product of algorithm and tiling choices."""
    counts = [len(family_invariants(fam)) for (_, fam) in program_hlacs(cp)]
    space = VariantSpace([])
    combos = itertools.product(
        itertools.product(*[range(c) for c in counts]),
        (nu, 2 * nu),
        unroll_policies)
    for (inv, blocksize, unroll) in combos:
        if len(space.variants) >= limits.max_variants:
            space.notes.append(
                f"truncated to first {limits.max_variants} variants")
            break
        space.variants.append(
            VariantConfig(inv, blocksize, unroll, isa, nu))
    return space
