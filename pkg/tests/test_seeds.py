import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susychain import SeedSpec, SingularPoint, eval_seed, factorization_energy, first_order_partner
from susychain.analysis import seed_riccati_residual

kappas = st.floats(0.3, 2.5)
shifts = st.floats(-5.0, 5.0)
xs = st.floats(-8.0, 8.0)


def test_r_seed_at_origin():
    v = eval_seed(SeedSpec("R", 1.0, 0.0), 0.0)
    assert v.beta == 0.0
    assert v.beta_prime == -1.0
    assert not v.is_singular


def test_n_seed_barrier():
    v = eval_seed(SeedSpec("N", 0.0, 0.0), 2.0)
    assert v.beta == -0.5
    assert v.beta_prime == 0.25


def test_s_seed_pole_is_flagged():
    v = eval_seed(SeedSpec("S", 1.0, 0.0), 0.0)
    assert v.is_singular
    assert eval_seed(SeedSpec("S", 1.0, 0.0), 5e-9).is_singular
    assert not eval_seed(SeedSpec("S", 1.0, 0.0), 1e-6).is_singular


def test_p_seed_poles_repeat():
    s = SeedSpec("P", 2.0, 0.3)
    for m in range(-3, 4):
        assert eval_seed(s, 0.3 + m * math.pi / 2).is_singular


@pytest.mark.parametrize(
    "spec, expected",
    [(SeedSpec("S", 2.0), -2.0), (SeedSpec("N"), 0.0), (SeedSpec("P", 1.0), 0.5), (SeedSpec("R", 1.0), -0.5)],
)
def test_factorization_energy(spec, expected):
    assert factorization_energy(spec) == expected
    assert spec.energy == expected


@pytest.mark.parametrize(
    "spec, x, expected",
    [
        (SeedSpec("R", 1.0, 0.0), 0.0, -1.0),
        (SeedSpec("N", 0.0, 0.0), 1.0, 1.0),
        (SeedSpec("P", 1.0, 0.0), math.pi / 2, 1.0),
    ],
)
def test_first_order_partner(spec, x, expected):
    assert first_order_partner(spec, x) == pytest.approx(expected, rel=1e-15)


def test_first_order_partner_raises_at_pole():
    with pytest.raises(SingularPoint):
        first_order_partner(SeedSpec("N", 0.0, 1.0), 1.0)


@pytest.mark.parametrize("bad", [("S", 0.0), ("R", -1.0), ("P", float("nan")), ("N", 1.0)])
def test_invalid_specs(bad):
    with pytest.raises(ValueError):
        SeedSpec(*bad)


def test_unknown_family():
    with pytest.raises(ValueError):
        SeedSpec("Q", 1.0)


@settings(max_examples=200, deadline=None)
@given(fam=st.sampled_from("SRPN"), kappa=kappas, shift=shifts, x=xs)
def test_riccati_residual(fam, kappa, shift, x):
    spec = SeedSpec(fam, 0.0 if fam == "N" else kappa, shift)
    if spec.pole_distance(x) < 0.1:
        return
    res = seed_riccati_residual(spec, np.array([x]))[0]
    assert abs(res) < 1e-9 * max(1.0, abs(spec.energy))


@settings(max_examples=200, deadline=None)
@given(fam=st.sampled_from("SRPN"), kappa=kappas, shift=shifts, x=xs)
def test_closed_form_identity(fam, kappa, shift, x):
    # -beta' + beta^2 + 2 eps = 0 with the analytic derivative
    spec = SeedSpec(fam, 0.0 if fam == "N" else kappa, shift)
    v = eval_seed(spec, x)
    if v.is_singular or spec.pole_distance(x) < 1e-3:
        return
    scale = max(1.0, v.beta**2)
    assert abs(-v.beta_prime + v.beta**2 + 2 * spec.energy) < 1e-12 * scale


@given(kappa=kappas, shift=shifts, t=st.floats(0.0, 10.0))
def test_r_partner_even_about_centre(kappa, shift, t):
    spec = SeedSpec("R", kappa, shift)
    left = first_order_partner(spec, -shift - t)
    right = first_order_partner(spec, -shift + t)
    assert left == pytest.approx(right, rel=1e-12, abs=1e-300)


@given(kappa=kappas, shift=shifts, x=xs)
def test_p_seed_periodic(kappa, shift, x):
    spec = SeedSpec("P", kappa, shift)
    if spec.pole_distance(x) < 1e-3:
        return
    b0 = eval_seed(spec, x).beta
    b1 = eval_seed(spec, x + math.pi / kappa).beta
    # cot near a pole amplifies the rounding of x + pi/k
    tol = 1e-12 + 4e-16 * abs(x + math.pi / kappa) * kappa * (1 + b0**2 / kappa**2)
    assert abs(b1 - b0) <= tol * max(1.0, abs(b0))


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.7, 4.0])
def test_n_is_small_kappa_limit_of_s(x):
    s = eval_seed(SeedSpec("S", 1e-4, 0.0), x).beta
    n = eval_seed(SeedSpec("N", 0.0, 0.0), x).beta
    assert abs(s - n) < 1e-6


def test_poles_listing():
    assert SeedSpec("R", 1.0).poles(-10, 10) == []
    assert SeedSpec("S", 1.0, 2.0).poles(-10, 10) == [2.0]
    assert SeedSpec("N", 0.0, 20.0).poles(-10, 10) == []
    assert len(SeedSpec("P", 1.0, 0.0).poles(-5 * math.pi + 0.5, 5 * math.pi + 0.5)) == 10


def test_vectorised_matches_scalar():
    spec = SeedSpec("S", 1.3, 0.4)
    x = np.linspace(-3, 3, 13)
    beta, bp, sing = spec.evaluate(x)
    for i, xi in enumerate(x):
        v = eval_seed(spec, xi)
        assert v.is_singular == sing[i]
        if not v.is_singular:
            assert v.beta == beta[i] and v.beta_prime == bp[i]
