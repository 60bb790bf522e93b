"""The dense reference oracle: inputs, references, residuals."""

import numpy as np
import pytest

from slingen.oracle import (
    generate_inputs,
    output_names,
    reference_outputs,
    rel_error,
    residuals,
    within_tolerance,
)
from slingen.oracle.reference import (
    cholesky_lower,
    tri_inverse,
    trisolve,
    trsyl_kron,
    trsyl_subst,
)

from conftest import ALL_PROGRAMS, checked


def _tri(rng, n, lower, unit_scale=1.0):
    a = rng.standard_normal((n, n)) * unit_scale + np.eye(n) * n
    return np.tril(a) if lower else np.triu(a)


def test_inputs_are_deterministic_per_seed():
    cp = checked("kf", 8)
    a = generate_inputs(cp.decls, seed=7)
    b = generate_inputs(cp.decls, seed=7)
    c = generate_inputs(cp.decls, seed=8)
    assert sorted(a) == sorted(b)
    for k in a:
        assert np.array_equal(a[k], b[k])
    assert any(not np.array_equal(a[k], c[k]) for k in a)


def test_inputs_respect_declared_structure():
    for name in ALL_PROGRAMS:
        cp = checked(name, 8)
        vals = generate_inputs(cp.decls, seed=0)
        for opname, v in vals.items():
            d = cp.decls[opname]
            assert v.shape == (d.rows, d.cols)
            if "UpTri" in d.properties:
                assert np.array_equal(v, np.triu(v))
            if "LoTri" in d.properties:
                assert np.array_equal(v, np.tril(v))
            if "UpSym" in d.properties or "LoSym" in d.properties:
                assert np.allclose(v, v.T)
            if "PD" in d.properties:
                assert np.all(np.linalg.eigvalsh((v + v.T) / 2) > 0)


def test_cholesky_lower_factorizes():
    rng = np.random.default_rng(0)
    for n in (1, 3, 8):
        a = rng.standard_normal((n, n))
        s = a @ a.T + n * np.eye(n)
        low = cholesky_lower(s)
        assert np.array_equal(low, np.tril(low))
        assert np.allclose(low @ low.T, s)


def test_trisolve_solves():
    rng = np.random.default_rng(1)
    for lower in (True, False):
        m = _tri(rng, 6, lower)
        b = rng.standard_normal((6, 3))
        x = trisolve(m, b, lower=lower)
        assert np.allclose(m @ x, b)


def test_tri_inverse():
    rng = np.random.default_rng(2)
    for lower in (True, False):
        m = _tri(rng, 5, lower)
        inv = tri_inverse(m, lower=lower)
        assert np.allclose(m @ inv, np.eye(5))
        want = np.tril(inv) if lower else np.triu(inv)
        assert np.allclose(inv, want)


def test_trsyl_independent_methods_agree():
    """Back-substitution and the Kronecker solve cross-check each other."""
    rng = np.random.default_rng(3)
    for n in (2, 5, 9):
        low = _tri(rng, n, lower=True)
        up = _tri(rng, n, lower=False)
        c = rng.standard_normal((n, n))
        xa = trsyl_subst(low, up, c)
        xb = trsyl_kron(low, up, c)
        assert rel_error(xa, xb) < 1e-10
        assert rel_error(low @ xa + xa @ up, c) < 1e-10


def test_reference_outputs_have_tiny_residuals():
    for name in ALL_PROGRAMS:
        cp = checked(name, 8)
        inputs = generate_inputs(cp.decls, seed=4)
        outs = reference_outputs(cp, inputs)
        assert set(output_names(cp)) <= set(outs)
        vals = dict(inputs)
        vals.update(outs)
        for line, r in residuals(cp, vals).items():
            assert r < 1e-12, f"{name} line {line}: {r}"


def test_residuals_detect_wrong_outputs():
    cp = checked("potrf", 8)
    inputs = generate_inputs(cp.decls, seed=5)
    outs = reference_outputs(cp, inputs)
    vals = dict(inputs)
    vals.update(outs)
    vals["X"] = vals["X"] + 0.5
    assert max(residuals(cp, vals).values()) > 1e-6


def test_rel_error_and_tolerance():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert rel_error(a, a) == 0.0
    assert rel_error(a * (1 + 1e-12), a) < 1e-11
    assert within_tolerance(a * (1 + 1e-12), a)
    assert not within_tolerance(a + 1.0, a)


def test_rel_error_handles_zero_reference():
    z = np.zeros((2, 2))
    assert rel_error(z, z) == 0.0
    assert rel_error(z + 1.0, z) > 0.0


def test_output_names_in_declaration_order():
    cp = checked("gpr", 4)
    names = output_names(cp)
    assert set(names) == {"L", "t0", "t1", "k", "v", "phi", "psi", "lambda"}
