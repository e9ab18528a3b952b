import numpy as np
import pytest

from adastep.quadrature import (
    GAUSS_LEGENDRE,
    LOBATTO,
    RADAU_RIGHT,
    LagrangeBasis,
    build_rule,
    integrate,
)


def test_trapezoid_nodes_weights():
    rule = build_rule(LOBATTO, 2)
    np.testing.assert_allclose(rule.nodes, [0.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-14)


def test_simpson_nodes_weights():
    rule = build_rule(LOBATTO, 3)
    np.testing.assert_allclose(rule.nodes, [0.0, 0.5, 1.0], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-14)


def test_radau_two_point():
    rule = build_rule(RADAU_RIGHT, 2)
    np.testing.assert_allclose(rule.nodes, [1 / 3, 1.0], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [0.75, 0.25], atol=1e-14)


def test_gauss_two_point():
    rule = build_rule(GAUSS_LEGENDRE, 2)
    r = 1 / np.sqrt(3)
    np.testing.assert_allclose(rule.nodes, [(1 - r) / 2, (1 + r) / 2], atol=1e-14)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize(
    "family,m",
    [(GAUSS_LEGENDRE, m) for m in range(1, 9)]
    + [(LOBATTO, m) for m in range(2, 9)]
    + [(RADAU_RIGHT, m) for m in range(2, 9)],
)
def test_exactness_on_monomials(family, m):
    rule = build_rule(family, m)
    assert abs(rule.weights.sum() - 1.0) < 1e-14
    for j in range(rule.exactness_degree + 1):
        approx = float(rule.weights @ rule.nodes**j)
        assert abs(approx - 1.0 / (j + 1)) < 1e-13, (family, m, j)


def test_declared_endpoints_exact():
    assert build_rule(LOBATTO, 4).includes_zero
    assert build_rule(LOBATTO, 4).includes_one
    radau = build_rule(RADAU_RIGHT, 5)
    assert radau.includes_one and not radau.includes_zero
    gauss = build_rule(GAUSS_LEGENDRE, 5)
    assert not gauss.includes_zero and not gauss.includes_one


@pytest.mark.parametrize("family,m", [(LOBATTO, 1), (RADAU_RIGHT, 1), (GAUSS_LEGENDRE, 0)])
def test_unsupported_m_rejected(family, m):
    with pytest.raises(ValueError):
        build_rule(family, m)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        build_rule("chebyshev", 3)


def test_integrate_simpson_quadratic_exact():
    rule = build_rule(LOBATTO, 3)
    assert abs(integrate(rule, (0.0, 1.0), lambda x: x**2) - 1.0 / 3.0) < 1e-15


def test_integrate_trapezoid_constant():
    rule = build_rule(LOBATTO, 2)
    assert abs(integrate(rule, (0.0, 2.0), lambda x: 1.0) - 2.0) < 1e-15


def test_integrate_gauss3_quintic_exact():
    rule = build_rule(GAUSS_LEGENDRE, 3)
    assert abs(integrate(rule, (0.0, 1.0), lambda x: x**5) - 1.0 / 6.0) < 1e-14


def test_integrate_rejects_empty_interval():
    rule = build_rule(LOBATTO, 2)
    with pytest.raises(ValueError):
        integrate(rule, (1.0, 1.0), lambda x: x)


def test_lagrange_delta_property():
    nodes = np.array([0.0, 0.3, 0.7, 1.0])
    basis = LagrangeBasis(nodes)
    np.testing.assert_allclose(basis.values(nodes), np.eye(4), atol=1e-14)


def test_lagrange_partition_of_unity():
    rng = np.random.default_rng(11)
    nodes = np.sort(rng.uniform(0, 1, size=5))
    basis = LagrangeBasis(nodes)
    s = np.linspace(0.0, 1.0, 100)
    totals = basis.values(s).sum(axis=0)
    assert np.max(np.abs(totals - 1.0)) < 1e-12
    # derivative of the constant is zero
    assert np.max(np.abs(basis.derivs(s).sum(axis=0))) < 1e-10


def test_lagrange_derivatives_against_polyfit():
    nodes = np.array([0.0, 0.25, 0.6, 1.0])
    basis = LagrangeBasis(nodes)
    rng = np.random.default_rng(5)
    coeffs = rng.normal(size=4)  # nodal values of some cubic
    poly = np.polynomial.polynomial.Polynomial.fit(nodes, coeffs, 3).convert()
    s = np.linspace(0, 1, 17)
    np.testing.assert_allclose(coeffs @ basis.values(s), poly(s), atol=1e-12)
    np.testing.assert_allclose(coeffs @ basis.derivs(s), poly.deriv()(s), atol=1e-11)
    np.testing.assert_allclose(coeffs @ basis.derivs2(s), poly.deriv(2)(s), atol=1e-10)


def test_lagrange_rejects_duplicate_nodes():
    with pytest.raises(ValueError):
        LagrangeBasis([0.0, 0.5, 0.5])
