import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlch.potential import (QUARTIC, G, G_eps, G_eps_prime, G_prime, RegularizedPotential, moreau_yosida_betahat,
                            resolvent_beta, yosida_beta)

eps_st = st.floats(1e-4, 1.0)
r_st = st.floats(-5.0, 5.0, allow_nan=False)


def test_quartic_pieces():
    r = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(QUARTIC.betahat(r), r ** 4)
    np.testing.assert_allclose(QUARTIC.beta(r), 4 * r ** 3)
    np.testing.assert_allclose(QUARTIC.pihat(r), -2 * r ** 2)
    np.testing.assert_allclose(QUARTIC.pi(r), -4 * r)
    assert QUARTIC.pi_lipschitz == 4.0
    assert G(1.0) == -1.0 and G_prime(1.0) == 0.0


@pytest.mark.parametrize("eps", [1e-4, 0.1, 1.0])
def test_resolvent_of_zero(eps):
    assert resolvent_beta(eps, 0.0) == 0.0
    assert yosida_beta(eps, 0.0) == 0.0
    assert moreau_yosida_betahat(eps, 0.0) == 0.0
    assert G_eps(eps, 0.0) == 0.0 and G_eps_prime(eps, 0.0) == 0.0


def test_worked_values():
    assert resolvent_beta(0.25, 2.0) == pytest.approx(1.0, abs=1e-14)
    s = resolvent_beta(0.125, 3.0)
    assert 1.45 < s < 1.46 and abs(s + 0.5 * s ** 3 - 3.0) < 1e-13 * 4
    assert yosida_beta(0.25, 2.0) == pytest.approx(4.0, rel=1e-12)
    assert moreau_yosida_betahat(0.25, 2.0) == pytest.approx(3.0, rel=1e-12)
    assert moreau_yosida_betahat(0.25, 2.0) <= QUARTIC.betahat(2.0)
    assert G_eps(0.25, 2.0) == pytest.approx(-5.0, rel=1e-12)
    assert G_eps_prime(0.25, 2.0) == pytest.approx(-4.0, rel=1e-12)
    assert yosida_beta(1e-6, 1.0) == pytest.approx(4.0, abs=1e-4)


def test_scalar_in_scalar_out_array_in_array_out():
    assert isinstance(resolvent_beta(0.1, 1.0), float)
    out = resolvent_beta(0.1, np.array([[1.0, 2.0], [0.0, -1.0]]))
    assert out.shape == (2, 2)
    out = yosida_beta(np.array([0.1, 0.2]), 1.0)
    assert out.shape == (2,)


def test_resolvent_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        resolvent_beta(0.0, 1.0)


def test_resolvent_residual(rng):
    r = rng.uniform(-50, 50, 5000)
    for eps in (1e-4, 1e-2, 1.0):
        s = resolvent_beta(eps, r)
        assert np.all(np.abs(s + eps * QUARTIC.beta(s) - r) <= 1e-13 * (1 + np.abs(r)))


def test_yosida_equals_beta_of_resolvent(rng):
    r = rng.uniform(-4, 4, 1000)
    for eps in (1e-3, 0.3):
        lhs = yosida_beta(eps, r)
        rhs = QUARTIC.beta(resolvent_beta(eps, r))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_envelope_derivative_is_yosida():
    r = np.linspace(-3, 3, 61)
    h = 1e-5
    for eps in (1e-2, 0.5):
        fd = (moreau_yosida_betahat(eps, r + h) - moreau_yosida_betahat(eps, r - h)) / (2 * h)
        np.testing.assert_allclose(fd, yosida_beta(eps, r), atol=1e-6 * np.max(np.abs(fd)) + 1e-6)
        fd = (G_eps(eps, r + h) - G_eps(eps, r - h)) / (2 * h)
        np.testing.assert_allclose(fd, G_eps_prime(eps, r), atol=1e-6 * (1 + np.max(np.abs(fd))))


def test_regularized_lower_bound_samples(rng):
    eps = 10 ** rng.uniform(-4, 0, 10_000)
    r = rng.uniform(-5, 5, 10_000)
    assert np.all(G_eps(eps, r) >= -2 * r ** 2 - 8 * eps * r ** 2 - 1e-12)


def test_yosida_converges_monotonically_as_eps_shrinks():
    r = np.array([-2.0, -0.5, 0.3, 1.0, 3.0])
    vals = np.array([np.abs(yosida_beta(e, r)) for e in (1.0, 1e-1, 1e-2, 1e-3, 1e-4)])
    assert np.all(np.diff(vals, axis=0) >= 0)
    np.testing.assert_allclose(vals[-1], np.abs(QUARTIC.beta(r)), rtol=2e-2)


def test_regularized_potential_object():
    reg = RegularizedPotential(QUARTIC, 0.25)
    assert reg.beta(2.0) == pytest.approx(4.0)
    assert reg.G(2.0) == pytest.approx(-5.0)
    limit = RegularizedPotential(QUARTIC, 0.0)
    assert limit.beta(2.0) == 32.0 and limit.G(2.0) == 8.0
    with pytest.raises(ValueError):
        RegularizedPotential(QUARTIC, -1.0)


@settings(max_examples=300, deadline=None)
@given(eps_st, r_st, r_st)
def test_yosida_laws(eps, r, s):
    br, bs = yosida_beta(eps, r), yosida_beta(eps, s)
    assert abs(br - bs) <= abs(r - s) / eps * (1 + 1e-9) + 1e-9
    assert (br - bs) * (r - s) >= -1e-9
    jr, js = resolvent_beta(eps, r), resolvent_beta(eps, s)
    assert abs(jr - js) <= abs(r - s) * (1 + 1e-12) + 1e-12
    env = moreau_yosida_betahat(eps, r)
    assert -1e-15 <= env <= QUARTIC.betahat(r) * (1 + 1e-12) + 1e-15
