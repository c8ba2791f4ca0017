import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlch.errors import ConfigurationError, DomainMismatchError
from nlch.grid import Field, inner_H, make_domain, norm_H, norm_V


def test_spacing_and_first_node():
    d = make_domain(0.04, 12.0, 481)
    assert d.h == pytest.approx(0.025, abs=1e-15)
    assert d.nodes[0] == 0.04
    assert d.nodes[-1] == pytest.approx(12.04, abs=1e-12)


@pytest.mark.parametrize("eta,L,n", [(0.04, 12.0, 2), (0.0, 1.0, 5), (1.0, -1.0, 5), (1.0, 1.0, 3.5)])
def test_invalid_domains_rejected(eta, L, n):
    with pytest.raises(ConfigurationError):
        make_domain(eta, L, n)


def test_trapezoid_weights_three_nodes():
    d = make_domain(1.0, 1.0, 3)
    np.testing.assert_allclose(d.weights, [0.25, 0.5, 0.25])
    assert d.weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n", [3, 10, 257, 1000])
def test_weights_sum_to_length_and_nodes_increase(n):
    d = make_domain(0.3, 7.5, n)
    assert abs(d.weights.sum() - 7.5) <= 1e-12 * 7.5
    assert np.all(np.diff(d.nodes) > 0)
    assert d.nodes[-1] == pytest.approx(7.8, abs=1e-12)


def test_nodes_and_weights_are_read_only():
    d = make_domain(0.04, 1.0, 5)
    with pytest.raises(ValueError):
        d.weights[0] = 1.0
    with pytest.raises(ValueError):
        d.nodes[0] = 1.0


def test_inner_constant_doubled_by_mirror():
    d = make_domain(1.0, 1.0, 3)
    one = d.constant(1.0)
    assert inner_H(one, one) == pytest.approx(2.0)
    assert inner_H(one, d.constant(0.0)) == 0.0


def test_inner_sine_square():
    for n, tol in ((101, 1e-3), (401, 1e-4)):
        d = make_domain(0.04, 12.0, n)
        u = d.field(np.sin(np.pi * (d.nodes - d.eta) / d.L))
        assert inner_H(u, u) == pytest.approx(d.L, rel=tol)


def test_norm_v_of_constant():
    d = make_domain(0.04, 12.0, 200)
    assert norm_V(d.constant(-3.0)) == pytest.approx(3.0 * np.sqrt(2 * 12.0), rel=1e-13)


def test_norm_v_of_spike_dominates_norm_h():
    d = make_domain(0.04, 12.0, 200)
    v = np.zeros(d.n)
    v[77] = 1.0
    u = d.field(v)
    assert np.isfinite(norm_V(u)) and norm_V(u) >= norm_H(u)


def test_norm_v_cosine_matches_continuous_eigenvalue():
    d = make_domain(0.04, 12.0, 801)
    k = 3
    u = d.field(np.cos(k * np.pi * (d.nodes - d.eta) / d.L))
    mu = (k * np.pi / d.L) ** 2
    assert norm_V(u) == pytest.approx(np.sqrt((1 + mu) * norm_H(u) ** 2), rel=1e-4)


def test_mismatched_domains_are_usage_errors():
    a = make_domain(0.04, 1.0, 5).constant(1.0)
    b = make_domain(0.04, 1.0, 6).constant(1.0)
    with pytest.raises(DomainMismatchError):
        inner_H(a, b)
    with pytest.raises(DomainMismatchError):
        a + b


def test_field_rejects_non_finite_values():
    d = make_domain(0.04, 1.0, 4)
    with pytest.raises(ValueError):
        Field(d, np.array([0.0, np.nan, 1.0, 2.0]))
    with pytest.raises(ValueError):
        Field(d, np.zeros(3))


def test_cubic_quadrature_second_order():
    errs = []
    for n in (41, 81, 161):
        d = make_domain(0.5, 2.0, n)
        u = d.field(d.nodes ** 3)
        exact = 2 * ((2.5 ** 4 - 0.5 ** 4) / 4)
        errs.append(abs(inner_H(u, d.constant(1.0)) - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


vectors = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=8, max_size=8)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors, st.floats(-10, 10, allow_nan=False))
def test_inner_bilinear_symmetric(u, v, c):
    d = make_domain(0.04, 2.0, 8)
    u, v = np.array(u), np.array(v)
    fu, fv = d.field(u), d.field(v)
    assert inner_H(fu, fv) == pytest.approx(inner_H(fv, fu), rel=1e-12, abs=1e-9)
    assert inner_H(fu * c, fv) == pytest.approx(c * inner_H(fu, fv), rel=1e-9, abs=1e-6)
    assert inner_H(fu, fu) >= 0
    assert norm_H(fu) <= norm_V(fu) + 1e-12
