"""Quadrature rules on the reference interval [0, 1] and Lagrange utilities.

The rule families matter beyond integration accuracy: feeding a rule to the
time-stepping solver selects the classical scheme it reproduces (trapezoid
gives Crank-Nicolson, Simpson the three-stage Lobatto IIIA method, right-Radau
rules the Radau IIA collocation family).

Nodes and weights for m <= 3 are hard-coded from the closed forms; larger
rules are computed at build time by Newton iteration on the defining
Legendre-polynomial conditions and validated against the exactness degree.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np
from numpy.polynomial import legendre as npleg

__all__ = [
    "GAUSS_LEGENDRE",
    "LOBATTO",
    "RADAU_RIGHT",
    "QuadRule",
    "LagrangeBasis",
    "build_rule",
    "integrate",
    "lagrange_eval",
]

GAUSS_LEGENDRE = "gauss-legendre"
LOBATTO = "lobatto"
RADAU_RIGHT = "radau-right"

_ALIASES = {
    "gauss": GAUSS_LEGENDRE,
    "gauss-legendre": GAUSS_LEGENDRE,
    "gausslegendre": GAUSS_LEGENDRE,
    "lobatto": LOBATTO,
    "radau": RADAU_RIGHT,
    "radau-right": RADAU_RIGHT,
    "radauright": RADAU_RIGHT,
}


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Nodes and weights on [0, 1] with a declared polynomial exactness degree."""

    family: str
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < -1e-14 or nodes[-1] > 1 + 1e-14:
            raise ValueError("nodes must lie in [0, 1]")
        if abs(weights.sum() - 1.0) > 1e-13:
            raise ValueError("weights must sum to 1 on the reference interval")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self):
        return self.nodes.size

    @property
    def includes_zero(self):
        return self.nodes[0] == 0.0

    @property
    def includes_one(self):
        return self.nodes[-1] == 1.0


def build_rule(family, m):
    """Build an ``m``-point rule of the given family on [0, 1].

    GaussLegendre needs m >= 1, Lobatto and RadauRight need m >= 2.
    """
    fam = _ALIASES.get(str(family).lower())
    if fam is None:
        raise ValueError(f"unknown quadrature family {family!r}")
    m = int(m)
    if fam == GAUSS_LEGENDRE:
        if m < 1:
            raise ValueError("Gauss-Legendre needs m >= 1")
        nodes, weights = _gauss_nodes(m)
        degree = 2 * m - 1
    elif fam == LOBATTO:
        if m < 2:
            raise ValueError("Lobatto needs m >= 2")
        nodes, weights = _lobatto_nodes(m)
        degree = 2 * m - 3
    else:
        if m < 2:
            raise ValueError("RadauRight needs m >= 2")
        nodes, weights = _radau_right_nodes(m)
        degree = 2 * m - 2
    rule = QuadRule(fam, nodes, weights, degree)
    _check_exactness(rule)
    return rule


def integrate(rule, interval, f):
    """Apply ``rule`` to ``f`` on [a, b]: (b-a) sum w_k f(a + s_k (b-a))."""
    a, b = interval
    if not b > a:
        raise ValueError("empty integration interval")
    vals = np.array([f(a + s * (b - a)) for s in rule.nodes])
    return (b - a) * np.tensordot(rule.weights, vals, axes=(0, 0))


# -- node construction ------------------------------------------------------


def _from_sym(nodes_sym, weights_sym):
    """Map a rule on [-1, 1] to [0, 1]."""
    nodes = 0.5 * (np.asarray(nodes_sym, dtype=float) + 1.0)
    weights = 0.5 * np.asarray(weights_sym, dtype=float)
    return nodes, weights


def _gauss_nodes(m):
    if m == 1:
        return np.array([0.5]), np.array([1.0])
    if m == 2:
        r = 1.0 / sqrt(3.0)
        return _from_sym([-r, r], [1.0, 1.0])
    if m == 3:
        r = sqrt(3.0 / 5.0)
        return _from_sym([-r, 0.0, r], [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
    return _from_sym(*npleg.leggauss(m))


def _lobatto_nodes(m):
    if m == 2:
        return np.array([0.0, 1.0]), np.array([0.5, 0.5])
    if m == 3:
        return np.array([0.0, 0.5, 1.0]), np.array([1.0, 4.0, 1.0]) / 6.0
    # interior nodes are the roots of P'_{m-1}
    dP = npleg.Legendre.basis(m - 1).deriv()
    x = np.sort(np.real(dP.roots()))
    d2P = dP.deriv()
    for _ in range(3):
        x = x - dP(x) / d2P(x)
    x = np.concatenate([[-1.0], x, [1.0]])
    Pm1 = npleg.Legendre.basis(m - 1)
    w = 2.0 / (m * (m - 1) * Pm1(x) ** 2)
    return _from_sym(x, w)


def _radau_right_nodes(m):
    if m == 2:
        return np.array([1.0 / 3.0, 1.0]), np.array([0.75, 0.25])
    if m == 3:
        s6 = sqrt(6.0)
        nodes = np.array([(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0])
        weights = np.array([(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0])
        return nodes, weights
    # interior nodes are the roots of P_{m-1} - P_m other than x = 1
    coeffs = np.zeros(m + 1)
    coeffs[m - 1] = 1.0
    coeffs[m] = -1.0
    Q = npleg.Legendre(coeffs)
    roots = np.sort(np.real(Q.roots()))
    x = roots[np.abs(roots - 1.0) > 1e-8]
    if x.size != m - 1:
        raise RuntimeError(f"expected {m - 1} interior Radau nodes, found {x.size}")
    dQ = Q.deriv()
    for _ in range(3):
        x = x - Q(x) / dQ(x)
    Pm1 = npleg.Legendre.basis(m - 1)
    w_int = (1.0 + x) / (m**2 * Pm1(x) ** 2)
    nodes_sym = np.concatenate([x, [1.0]])
    weights_sym = np.concatenate([w_int, [2.0 / m**2]])
    return _from_sym(nodes_sym, weights_sym)


def _check_exactness(rule):
    degrees = np.arange(rule.exactness_degree + 1)
    approx = (rule.nodes[None, :] ** degrees[:, None]) @ rule.weights
    exact = 1.0 / (degrees + 1.0)
    err = np.max(np.abs(approx - exact))
    if err > 1e-13:
        raise RuntimeError(f"{rule.family} m={rule.m} misses exactness degree {rule.exactness_degree} (err {err:.2e})")


# -- Lagrange basis ---------------------------------------------------------


def lagrange_eval(nodes, s):
    """Values and first two derivatives of the Lagrange basis on ``nodes``.

    Returns three arrays of shape (n_nodes, n_points). The computation uses
    leave-one-out products, which is exact at the nodes themselves (no
    division by s - node ever occurs).
    """
    nodes = np.asarray(nodes, dtype=float)
    pts = np.atleast_1d(np.asarray(s, dtype=float))
    n = nodes.size
    vals = np.empty((n, pts.size))
    d1 = np.zeros((n, pts.size))
    d2 = np.zeros((n, pts.size))
    for k in range(n):
        others = np.delete(nodes, k)
        denom = np.prod(nodes[k] - others) if n > 1 else 1.0
        diffs = pts[None, :] - others[:, None]
        vals[k] = np.prod(diffs, axis=0) / denom
        for i in range(n - 1):
            d1[k] += np.prod(np.delete(diffs, i, axis=0), axis=0)
            for j in range(i + 1, n - 1):
                d2[k] += 2.0 * np.prod(np.delete(diffs, [i, j], axis=0), axis=0)
        d1[k] /= denom
        d2[k] /= denom
    return vals, d1, d2


class LagrangeBasis:
    """Lagrange interpolation basis l_k(s) = prod_{j != k} (s - s_j)/(s_k - s_j)."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if np.unique(nodes).size != nodes.size:
            raise ValueError("interpolation nodes must be distinct")
        self.nodes = nodes

    def values(self, s):
        out = lagrange_eval(self.nodes, s)[0]
        return out[:, 0] if np.isscalar(s) else out

    def derivs(self, s):
        out = lagrange_eval(self.nodes, s)[1]
        return out[:, 0] if np.isscalar(s) else out

    def derivs2(self, s):
        out = lagrange_eval(self.nodes, s)[2]
        return out[:, 0] if np.isscalar(s) else out
