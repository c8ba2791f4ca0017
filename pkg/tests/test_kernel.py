import math

import numpy as np
import pytest
from scipy.special import erf

from nlch.grid import make_domain
from nlch.kernel import (DEFAULT_C_J, KernelOperator, KernelSpec, compute_a, convolution_operator_symmetry_check,
                         convolve, kernel_mass)
from nlch.model import Model


@pytest.mark.parametrize("c_J,mass", [(DEFAULT_C_J, 21.0), (1 / math.sqrt(math.pi), 1.0),
                                      (2 / math.sqrt(math.pi), 2.0)])
def test_kernel_mass(c_J, mass):
    assert kernel_mass(KernelSpec(c_J)) == pytest.approx(mass, abs=1e-12)


def test_kernel_even_and_nonnegative():
    spec = KernelSpec()
    x = np.linspace(-8, 8, 321)
    np.testing.assert_array_equal(spec(x), spec(-x))
    assert np.all(spec(x) >= 0)


def test_invalid_amplitude():
    with pytest.raises(ValueError):
        KernelSpec(0.0)
    with pytest.raises(ValueError):
        KernelSpec(1.0, profile=lambda x: np.exp(-np.abs(x)))


def test_closed_a_tends_to_total_mass():
    d = make_domain(0.04, 12.0, 512)
    a = compute_a(KernelSpec(), d, "closed").values
    assert a[-1] == pytest.approx(21.0, abs=1e-12)
    assert np.all(a <= 21.0 + 1e-12) and np.all(a >= 0)
    assert np.all(np.diff(a) >= 0)


def test_closed_a_minimum_at_inner_radius():
    d = make_domain(0.04, 12.0, 512)
    a = compute_a(KernelSpec(), d, "closed").values
    expected = 21.0 - 10.5 * erf(0.08)
    assert a.min() == pytest.approx(a[0]) and a[0] == pytest.approx(expected, rel=1e-14)
    assert a.min() >= 20.0


def test_larger_inner_radius_breaks_lower_bound():
    d = make_domain(0.05, 12.0, 512)
    assert compute_a(KernelSpec(), d, "closed").values.min() < 20.0


def test_quadrature_matches_closed_form_in_interior():
    d = make_domain(0.04, 12.0, 2049)
    spec = KernelSpec()
    closed = compute_a(spec, d, "closed").values
    quad = compute_a(spec, d, "quadrature").values
    seg = compute_a(spec, d, "segment").values
    band = (d.nodes >= d.eta + 4) & (d.nodes <= d.eta + d.L - 5)
    assert np.max(np.abs(quad - closed)[band]) < 1e-8
    # Against the exact integral over the truncated segment the only error is
    # the trapezoid rule, which is second order everywhere.
    assert np.max(np.abs(quad - seg)) < 5e-5


def test_convolve_of_one_equals_quadrature_a_exactly():
    d = make_domain(0.04, 12.0, 256)
    spec = KernelSpec()
    np.testing.assert_array_equal(convolve(spec, d, np.ones(d.n)),
                                  compute_a(spec, d, "quadrature").values)
    np.testing.assert_array_equal(convolve(spec, d, np.zeros(d.n)), np.zeros(d.n))


def test_convolve_field_in_field_out():
    d = make_domain(0.04, 3.0, 32)
    out = convolve(KernelSpec(), d, d.constant(1.0))
    assert out.domain is d


def test_fast_path_matches_dense(rng):
    d = make_domain(0.04, 12.0, 512)
    op = KernelOperator(KernelSpec(), d)
    for _ in range(5):
        u = rng.standard_normal(d.n)
        dense = op.apply(u)
        assert np.max(np.abs(op.apply_fast(u) - dense)) <= 1e-12 * np.max(np.abs(dense))


def test_symmetry_check_passes_for_gaussian():
    d = make_domain(0.04, 12.0, 256)
    assert convolution_operator_symmetry_check(KernelSpec(), d, samples=100)


def test_symmetry_check_rejects_asymmetric_operator(rng):
    d = make_domain(0.04, 3.0, 40)
    M = rng.standard_normal((d.n, d.n))
    assert not convolution_operator_symmetry_check(KernelSpec(), d, apply=lambda u: M @ u)


def test_young_bound(rng):
    d = make_domain(0.04, 12.0, 512)
    op = KernelOperator(KernelSpec(), d)
    for _ in range(10):
        u = rng.standard_normal(d.n)
        assert d.norm_h(op.apply(u)) <= 21.0 * d.norm_h(u) * (1 + 1e-6)


def test_two_energy_forms_agree(rng):
    m = Model(make_domain(0.04, 12.0, 256))
    for _ in range(5):
        u = rng.standard_normal(m.domain.n)
        a, b = m.nonlocal_energy(u), m.nonlocal_energy_double(u)
        assert a == pytest.approx(b, rel=1e-10)
