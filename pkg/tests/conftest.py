"""Shared helpers for the test suite."""

from __future__ import annotations

import itertools
import os

import numpy as np
import pytest

from slingen.frontend import check, parse
from slingen.synthesis.lower import family_invariants, lower, program_hlacs
from slingen.tiling import pack_scalars, tile_program
from slingen.cir import loadstore_analysis, to_cir, unroll_and_scalarize

PROGRAMS_DIR = os.path.join(os.path.dirname(__file__), os.pardir,
                            "src", "slingen", "programs")

ALL_PROGRAMS = ("potrf", "trsyl", "trlya", "trtri", "gpr", "kf", "l1a")
TABLE_PROGRAMS = ("potrf", "trsyl", "trlya", "trtri")


def program_source(name: str) -> str:
    with open(os.path.join(PROGRAMS_DIR, f"{name}.la")) as f:
        return f.read()


def checked(name: str, n: int):
    return check(parse(program_source(name), name=name), {"n": n})


def invariant_counts(cp) -> list[int]:
    return [len(family_invariants(fam)) for (_, fam) in program_hlacs(cp)]


def all_choices(cp):
    return itertools.product(*[range(c) for c in invariant_counts(cp)])


def build_ir(cp, choices=None, blocksize=4, nu=4, optimize=True):
    bp = lower(cp, choices=choices, blocksize=blocksize)
    packed, _ = pack_scalars(bp)
    tp = tile_program(packed, nu=nu)
    fn = to_cir(tp)
    if not optimize:
        return fn
    fn2, _ = loadstore_analysis(unroll_and_scalarize(fn))
    return fn2


def masked(decl, a: np.ndarray) -> np.ndarray:
    if "UpTri" in decl.properties:
        return np.triu(a)
    if "LoTri" in decl.properties:
        return np.tril(a)
    return a


def observable_outputs(cp):
    """Output names whose storage is not taken over by another operand."""
    from slingen.oracle import output_names

    overwritten = {d.overwrites for d in cp.decls.values() if d.overwrites}
    return [n for n in output_names(cp) if n not in overwritten]


@pytest.fixture(scope="session")
def chol_codelet():
    """The standalone vector-size Cholesky codelet program (n = nu = 4)."""
    return checked("potrf", 4)
