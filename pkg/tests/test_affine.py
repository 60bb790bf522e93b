"""Affine expression arithmetic."""

import pytest
from hypothesis import given, strategies as st

from slingen.affine import Aff

names = st.sampled_from(["i", "j", "k"])
affs = st.builds(
    lambda c, ts: Aff(c, tuple(sorted({v: x for v, x in ts}.items()))),
    st.integers(-20, 20),
    st.lists(st.tuples(names, st.integers(-5, 5).filter(bool)),
             max_size=3, unique_by=lambda t: t[0]))
envs = st.fixed_dictionaries({"i": st.integers(-9, 9),
                              "j": st.integers(-9, 9),
                              "k": st.integers(-9, 9)})


def test_construction_and_of():
    assert Aff.of(3) == Aff(3)
    assert Aff.of("i") == Aff(0, (("i", 1),))
    assert Aff.of(Aff(2)) == Aff(2)
    assert Aff.var("i", 0) == Aff(0)
    with pytest.raises(TypeError):
        Aff.of(1.5)


def test_zero_coefficients_dropped():
    assert (Aff.var("i") - Aff.var("i")) == Aff(0)
    assert (Aff.var("i") * 0) == Aff(0)


@given(affs, affs, envs)
def test_add_sub_agree_with_eval(a, b, env):
    assert (a + b).eval(env) == a.eval(env) + b.eval(env)
    assert (a - b).eval(env) == a.eval(env) - b.eval(env)
    assert (-a).eval(env) == -a.eval(env)


@given(affs, st.integers(-6, 6), envs)
def test_scale_agrees_with_eval(a, k, env):
    assert (a * k).eval(env) == k * a.eval(env)
    assert (k * a) == (a * k)


@given(affs, st.integers(1, 5), envs)
def test_divide_inverts_scale(a, k, env):
    assert (a * k).divide(k) == a
    assert (a * k).divide(k).eval(env) == a.eval(env)


def test_divide_rejects_inexact():
    with pytest.raises(ValueError):
        Aff(3).divide(2)


@given(affs, envs)
def test_subst_full_yields_const(a, env):
    s = a.subst(env)
    assert s.is_const
    assert s.as_int() == a.eval(env)


def test_subst_partial():
    a = Aff.var("i") * 2 + Aff.var("j") + 1
    s = a.subst({"i": 3})
    assert s == Aff.var("j") + 7
    assert s.vars() == frozenset({"j"})


def test_as_int_requires_const():
    with pytest.raises(ValueError):
        (Aff.var("i") + 1).as_int()


def test_str_round_readability():
    assert str(Aff(0)) == "0"
    assert str(Aff.var("i") - 1) == "i-1"
    assert str(Aff.var("i") * 4 + 3) == "4*i+3"
