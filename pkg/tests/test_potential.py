"""Potential parsing, confinement guards, evaluation, exact perturbation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from orthoflow import (
    PerturbationBreaksConvergence,
    Potential,
    hermite_potential,
    quartic_potential,
)


def test_text_parsing_basic():
    p = Potential.from_text("2=1.0,4=0.25")
    assert p.degree == 4
    assert p.coefficient(2) == 1
    assert p.coefficient(4) == mpf("0.25")
    assert p.coefficient(3) == 0


def test_json_parsing():
    p = Potential.from_text('{"u": {"2": "2"}}')
    assert p == hermite_potential()
    # bare object without the "u" wrapper also works
    q = Potential.from_text('{"4": "1"}')
    assert q == quartic_potential()


def test_text_roundtrip():
    p = Potential({2: "1", 3: "0.3", 4: "1"})
    assert Potential.from_text(p.to_text()) == p


def test_constant_term_dropped():
    assert Potential({0: "7", 2: "2"}) == Potential({2: "2"})


def test_zero_coefficients_dropped():
    p = Potential({2: "2", 6: "0"})
    assert p.degree == 2
    assert 6 not in p.u


def test_rejects_negative_index():
    with pytest.raises(ValueError):
        Potential({-1: "1"})


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        Potential({2: "inf"})
    with pytest.raises(ValueError):
        Potential({2: float("nan")})


def test_rejects_malformed_text():
    with pytest.raises(ValueError):
        Potential.from_text("2=")
    with pytest.raises(ValueError):
        Potential.from_text("x=1")
    with pytest.raises(ValueError):
        Potential.from_text("2=1,2=3")


def test_confinement_guard():
    assert quartic_potential().is_confining()
    assert not Potential({3: "1"}).is_confining()  # odd top degree
    assert not Potential({4: "-1"}).is_confining()  # negative leading
    assert not Potential({}).is_confining()
    with pytest.raises(ValueError):
        Potential({3: "1"}).require_confining()
    with pytest.raises(ValueError):
        Potential({2: "-2"}).require_confining()


def test_is_even():
    assert hermite_potential().is_even()
    assert quartic_potential().is_even()
    assert not Potential({2: "1", 3: "0.3", 4: "1"}).is_even()


def test_eval_hermite():
    # u_2 = 2 gives V(x) = x^2, V'(x) = 2x
    p = hermite_potential()
    assert p.eval_V(mpf("1.5")) == mpf("2.25")
    assert p.eval_Vprime(mpf("1.5")) == mpf(3)
    assert p.vprime_coeffs() == (mpf(0), mpf(2))


def test_eval_quartic():
    # u_4 = 1 gives V(x) = x^4/4, V'(x) = x^3
    p = quartic_potential()
    assert p.eval_V(mpf(2)) == mpf(4)
    assert p.eval_Vprime(mpf(2)) == mpf(8)
    assert p.vprime_coeffs() == (mpf(0), mpf(0), mpf(0), mpf(1))


def test_vprime_degree():
    assert hermite_potential().vprime_degree == 1
    assert Potential({2: "1", 3: "0.3", 4: "1"}).vprime_degree == 3
    assert Potential({}).vprime_degree == 0


def test_empty_potential_evaluates_to_zero():
    p = Potential({})
    assert p.eval_V(mpf(3)) == 0
    assert p.eval_Vprime(mpf(3)) == 0
    assert p.vprime_coeffs() == (mpf(0),)


def test_perturb_roundtrips_exactly():
    p = Potential({2: "1", 3: "0.3", 4: "1"})
    d = mpf("1e-8")
    q = p.perturb(3, d).perturb(3, -d)
    assert q.u == p.u  # bit-for-bit


def test_perturb_new_index():
    p = quartic_potential()
    q = p.perturb(2, mpf("0.5"))
    assert q.coefficient(2) == mpf("0.5")
    assert q.coefficient(4) == 1


def test_perturb_that_breaks_confinement():
    p = quartic_potential()
    with pytest.raises(PerturbationBreaksConvergence):
        p.perturb(4, -2)  # flips the leading sign
    with pytest.raises(ValueError):
        p.perturb(0, 1)


def test_perturb_removing_top_coefficient():
    # cancelling u_4 exactly leaves V = x^2, still confining
    p = Potential({2: "2", 4: "1"})
    q = p.perturb(4, -1)
    assert q == hermite_potential()


valid_maps = st.dictionaries(
    st.integers(min_value=1, max_value=6),
    st.floats(min_value=-4, max_value=4, allow_nan=False),
    min_size=0,
    max_size=4,
)


@given(valid_maps)
@settings(max_examples=200, deadline=None)
def test_text_roundtrip_property(u):
    p = Potential(u)
    assert Potential.from_text(p.to_text()) == p
    assert Potential.from_text(__import__("json").dumps(p.to_json_obj())) == p


@given(valid_maps, st.floats(min_value=-6, max_value=6, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_eval_matches_naive_sum(u, x):
    p = Potential(u)
    x = mpf(x)
    naive_v = sum((v / k) * x**k for k, v in p.u.items())
    naive_vp = sum(v * x ** (k - 1) for k, v in p.u.items())
    tol = mpf(2) ** (-mp.prec + 24) * max(mpf(1), abs(naive_v), abs(naive_vp))
    assert abs(p.eval_V(x) - naive_v) <= tol
    assert abs(p.eval_Vprime(x) - naive_vp) <= tol


@given(
    st.integers(min_value=1, max_value=5),
    st.floats(min_value=-0.01, max_value=0.01, allow_nan=False),
)
@settings(max_examples=150, deadline=None)
def test_perturb_inverse_property(k, delta):
    p = Potential({2: "1", 3: "0.3", 4: "1"})
    try:
        q = p.perturb(k, delta).perturb(k, -delta)
    except PerturbationBreaksConvergence:
        return
    assert q.u == p.u
