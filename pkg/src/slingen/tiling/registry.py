"""The vector-size kernel registry.

Shape classes: "M" (matrix, both extents > 1), "v" (column), "r" (row),
"s" (scalar).  Every kernel works on operands of extent at most the
vector length in each dimension; leftovers are handled by masked
loaders, so one kernel covers all partial extents of its shape class.

The registry is closed over what the tiler emits: a single-operator
vector-size statement always matches exactly one kernel.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Kernel:
    id: str
    op: str
    ins: tuple[str, ...]
    out: str


class NoKernelError(Exception):
    """No registry kernel matches (a tiler bug: statement not decomposed)."""


def _k(op: str, ins: tuple[str, ...], out: str) -> Kernel:
    return Kernel(f"{op}_{''.join(ins)}" if ins else f"{op}_{out}",
                  op, ins, out)


def _build() -> list[Kernel]:
    # scalar-shaped variants exist because leftover tiling can cut a
    # statement down to single elements
    ks: list[Kernel] = []
    for sh in ("M", "v", "r", "s"):
        ks.append(_k("add", (sh, sh), sh))
        ks.append(_k("sub", (sh, sh), sh))
        ks.append(_k("smul", ("s", sh), sh))
        ks.append(_k("div", (sh, "s"), sh))
        ks.append(_k("neg", (sh,), sh))
        ks.append(_k("copy", (sh,), sh))
        ks.append(_k("zero", (), sh))
    ks.append(_k("mul", ("M", "M"), "M"))
    ks.append(_k("mul", ("M", "v"), "v"))
    ks.append(_k("mul", ("r", "M"), "r"))
    ks.append(_k("mul", ("v", "r"), "M"))
    ks.append(_k("mul", ("r", "v"), "s"))
    ks.append(_k("trans", ("M",), "M"))
    ks.append(_k("trans", ("v",), "r"))
    ks.append(_k("trans", ("r",), "v"))
    return ks


def _key(k: Kernel) -> tuple:
    # nullary kernels (zero) are only distinguished by their output shape
    return (k.op, k.ins) if k.ins else (k.op, k.ins, k.out)


_KERNELS = _build()
_BY_KEY = {_key(k): k for k in _KERNELS}


def registry_kernels() -> list[Kernel]:
    return list(_KERNELS)


def shape_of(rows: int, cols: int) -> str:
    if rows == 1 and cols == 1:
        return "s"
    if cols == 1:
        return "v"
    if rows == 1:
        return "r"
    return "M"


def match(op: str, in_shapes: tuple[str, ...],
          out: str = "") -> Kernel:
    key = (op, in_shapes) if in_shapes else (op, in_shapes, out)
    try:
        return _BY_KEY[key]
    except KeyError:
        raise NoKernelError(f"no kernel for {op} over {in_shapes}") from None
