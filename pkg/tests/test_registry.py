"""Closure of the vector-size kernel registry."""

import itertools

import pytest

from slingen.tiling.registry import (
    Kernel,
    NoKernelError,
    match,
    registry_kernels,
    shape_of,
)

SHAPES = ("M", "v", "r", "s")

# result shape of a well-typed single-operator statement, or None
_MUL = {
    ("M", "M"): "M", ("M", "v"): "v", ("r", "M"): "r",
    ("v", "r"): "M", ("r", "v"): "s",
}
_TRANS = {"M": "M", "v": "r", "r": "v", "s": "s"}


def _well_typed():
    """Every single-operator sBLAC shape combination the tiler can emit."""
    cases = []
    for sh in SHAPES:
        cases.append(("add", (sh, sh)))
        cases.append(("sub", (sh, sh)))
        cases.append(("smul", ("s", sh)))
        cases.append(("div", (sh, "s")))
        cases.append(("neg", (sh,)))
        cases.append(("copy", (sh,)))
        cases.append(("zero", ()))
    for ins, out in _MUL.items():
        cases.append(("mul", ins))
    for sh in ("M", "v", "r"):
        cases.append(("trans", (sh,)))
    return cases


def test_registry_is_closed_over_well_typed_sblacs():
    for op, ins in _well_typed():
        if op == "zero":
            for sh in SHAPES:
                assert match(op, ins, out=sh).out == sh
            continue
        k = match(op, ins)
        assert isinstance(k, Kernel)
        assert k.op == op and k.ins == ins


def test_registry_kernels_have_unique_keys():
    ks = registry_kernels()
    keys = [(k.op, k.ins, k.out if not k.ins else "") for k in ks]
    assert len(set(keys)) == len(keys)
    ids = [k.id for k in ks]
    assert len(set(ids)) == len(ids)


def test_every_kernel_is_reachable_by_match():
    for k in registry_kernels():
        assert match(k.op, k.ins, out=k.out) is k


def test_mul_output_shapes():
    for ins, out in _MUL.items():
        assert match("mul", ins).out == out


def test_trans_output_shapes():
    for sh in ("M", "v", "r"):
        assert match("trans", (sh,)).out == _TRANS[sh]


def test_ill_typed_statements_rejected():
    with pytest.raises(NoKernelError):
        match("mul", ("v", "v"))
    with pytest.raises(NoKernelError):
        match("add", ("M", "v"))
    with pytest.raises(NoKernelError):
        match("frobnicate", ("M",))


def test_shape_of():
    assert shape_of(4, 4) == "M"
    assert shape_of(3, 1) == "v"
    assert shape_of(1, 4) == "r"
    assert shape_of(1, 1) == "s"


def test_shape_universe_is_covered():
    """No well-typed combination outside the enumerated table matches."""
    table = set(_well_typed())
    for op in ("add", "sub", "smul", "div", "neg", "copy", "mul", "trans"):
        for arity in (1, 2):
            for ins in itertools.product(SHAPES, repeat=arity):
                try:
                    match(op, ins)
                except NoKernelError:
                    assert (op, ins) not in table
                else:
                    assert (op, ins) in table
