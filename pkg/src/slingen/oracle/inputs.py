"""Random input generation for checked programs.

Matrices are drawn to be numerically friendly: positive definite
operands come from A'A plus a diagonal shift, triangular factors are
diagonally dominant with positive diagonals, everything else is uniform
in [-1, 1).  Symmetric operands are materialized as full matrices so
both halves can be read directly.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..frontend.astnodes import OperandDecl


def _spd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.uniform(-1.0, 1.0, (n, n))
    return a.T @ a + n * np.eye(n)


def _triangular(rng: np.random.Generator, d: OperandDecl) -> np.ndarray:
    n = d.rows
    off = rng.uniform(-1.0, 1.0, (n, n)) / (2.0 * max(n, 1))
    m = np.tril(off, -1) if "LoTri" in d.properties else np.triu(off, 1)
    diag = (np.ones(n) if "UnitDiag" in d.properties
            else rng.uniform(1.0, 2.0, n))
    return m + np.diag(diag)


def generate_inputs(decls: Mapping[str, OperandDecl],
                    seed: int) -> dict[str, np.ndarray]:
    """Values for every In/InOut operand, keyed by name.

    All values are 2-d float64 arrays (vectors are n-by-1, scalars
    1-by-1).  Iteration follows declaration order, so a given seed
    always produces the same values for the same program.
    """
    rng = np.random.default_rng(seed)
    vals: dict[str, np.ndarray] = {}
    for d in decls.values():
        if d.iotype not in ("In", "InOut"):
            continue
        if d.is_triangular:
            vals[d.name] = _triangular(rng, d)
        elif "PD" in d.properties:
            vals[d.name] = _spd(rng, d.rows)
        elif d.is_symmetric:
            a = rng.uniform(-1.0, 1.0, (d.rows, d.rows))
            vals[d.name] = (a + a.T) / 2.0
        else:
            vals[d.name] = rng.uniform(-1.0, 1.0, (d.rows, d.cols))
    return vals
