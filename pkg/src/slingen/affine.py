"""Affine integer expressions over induction variables.

Every index, extent, and loop bound in the pipeline is affine in the
enclosing induction variables: ``c0 + c1*i + c2*j + ...``.  Keeping this
restriction explicit makes region arithmetic (aliasing, bounds checks,
loop unrolling) decidable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union


@dataclass(frozen=True)
class Aff:
    """c0 + sum(coeff * var).  Terms with coefficient 0 are dropped."""

    const: int = 0
    terms: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(x: AffLike) -> "Aff":
        if isinstance(x, Aff):
            return x
        if isinstance(x, int):
            return Aff(x)
        if isinstance(x, str):
            return Aff(0, ((x, 1),))
        raise TypeError(f"cannot build affine expression from {x!r}")

    @staticmethod
    def var(name: str, coeff: int = 1) -> "Aff":
        return Aff(0, ((name, coeff),)) if coeff else Aff(0)

    def _merge(self, other: "Aff", sign: int) -> "Aff":
        acc = dict(self.terms)
        for v, c in other.terms:
            acc[v] = acc.get(v, 0) + sign * c
        terms = tuple(sorted((v, c) for v, c in acc.items() if c != 0))
        return Aff(self.const + sign * other.const, terms)

    def __add__(self, other: AffLike) -> "Aff":
        return self._merge(Aff.of(other), 1)

    __radd__ = __add__

    def __sub__(self, other: AffLike) -> "Aff":
        return self._merge(Aff.of(other), -1)

    def __rsub__(self, other: AffLike) -> "Aff":
        return Aff.of(other)._merge(self, -1)

    def __mul__(self, k: int) -> "Aff":
        if not isinstance(k, int):
            raise TypeError("affine expressions only scale by integers")
        if k == 0:
            return Aff(0)
        return Aff(self.const * k, tuple((v, c * k) for v, c in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "Aff":
        return self * -1

    @property
    def is_const(self) -> bool:
        return not self.terms

    def as_int(self) -> int:
        if self.terms:
            raise ValueError(f"{self} is not constant")
        return self.const

    def subst(self, env: Mapping[str, AffLike]) -> "Aff":
        out = Aff(self.const)
        for v, c in self.terms:
            out = out + (Aff.of(env[v]) * c if v in env else Aff.var(v, c))
        return out

    def eval(self, env: Mapping[str, int]) -> int:
        val = self.const
        for v, c in self.terms:
            val += c * env[v]
        return val

    def divide(self, k: int) -> "Aff":
        """Exact division by k; raises if any coefficient is not divisible."""
        if self.const % k or any(c % k for _, c in self.terms):
            raise ValueError(f"{self} not divisible by {k}")
        return Aff(self.const // k, tuple((v, c // k) for v, c in self.terms))

    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.terms)

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{c}*{v}")
        if self.const or not parts:
            parts.append(str(self.const))
        s = parts[0]
        for p in parts[1:]:
            s += f"-{p[1:]}" if p.startswith("-") else f"+{p}"
        return s


AffLike = Union[Aff, int, str]


ZERO = Aff(0)
ONE = Aff(1)
