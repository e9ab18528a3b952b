"""Benchmark initial-value problems y' = F(t, y), y(t0) = y0.

Each problem carries its right-hand side, the Jacobian with respect to y, the
time partial, and the weighting used for residual norms. The heat problems are
P1 finite-element semi-discretizations on the unit square with homogeneous
Dirichlet conditions eliminated from the system.
"""

from dataclasses import dataclass
from math import sqrt
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lu_factor, lu_solve

__all__ = [
    "NormWeight",
    "OdeProblem",
    "HeatSemiDiscretization",
    "linear_test",
    "van_der_pol",
    "van_der_pol_eps",
    "predator_prey",
    "assemble_heat",
    "make_problem",
    "PROBLEM_NAMES",
]


@dataclass(eq=False)
class NormWeight:
    """Weighting of pointwise residual vectors.

    variant "identity":  |v|^2 = v . v
    variant "mass":      |v|^2 = h^(2-d) (Mv . Mv)
    variant "dual":      |v|^2 = A^{-1} M v . M v  (A SPD after elimination)
    """

    variant: str = "identity"
    M: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    h_space: Optional[float] = None
    d_space: Optional[int] = None

    def __post_init__(self):
        if self.variant not in ("identity", "mass", "dual"):
            raise ValueError(f"unknown norm weight variant {self.variant!r}")
        if self.variant != "identity" and self.M is None:
            raise ValueError("mass/dual weighting needs the mass matrix")
        self._choA = cho_factor(self.A) if self.variant == "dual" else None
        if self.variant == "mass":
            self._scale = float(self.h_space) ** (2 - int(self.d_space))
        else:
            self._scale = 1.0

    def norm_sq(self, v):
        """Squared weighted norm of each row of ``v`` (shape (..., d))."""
        v = np.asarray(v, dtype=float)
        if self.variant == "identity":
            return np.sum(v * v, axis=-1)
        mv = v @ self.M  # M symmetric
        if self.variant == "mass":
            return self._scale * np.sum(mv * mv, axis=-1)
        flat = mv.reshape(-1, mv.shape[-1])
        z = cho_solve(self._choA, flat.T).T
        return np.sum(z * flat, axis=-1).reshape(mv.shape[:-1])


@dataclass(eq=False)
class OdeProblem:
    """Initial-value problem with analytic Jacobian and time partial."""

    name: str
    dim: int
    t0: float
    t_end: float
    y0: np.ndarray
    f: Callable
    jac_y: Callable
    f_t: Callable
    residual_weight: NormWeight
    lipschitz_L1: Optional[float] = None
    lipschitz_is_global: bool = False
    is_linear: bool = False
    autonomous: bool = True
    exact: Optional[Callable] = None
    exact_deriv: Optional[Callable] = None

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if self.y0.size != self.dim:
            raise ValueError("initial value dimension mismatch")
        if not self.t0 < self.t_end:
            raise ValueError("empty time horizon")

    @property
    def horizon(self):
        return (self.t0, self.t_end)


# -- simple ODE benchmarks ---------------------------------------------------


def linear_test(lam, y0=1.0, t_end=1.0):
    """Scalar y' = lam*y with exact solution y0*exp(lam*t); convergence oracle."""
    lam = float(lam)
    J = np.array([[lam]])
    return OdeProblem(
        name="linear",
        dim=1,
        t0=0.0,
        t_end=float(t_end),
        y0=np.array([float(y0)]),
        f=lambda t, y: lam * y,
        jac_y=lambda t, y: J,
        f_t=lambda t, y: np.zeros(1),
        residual_weight=NormWeight(),
        lipschitz_L1=abs(lam),
        lipschitz_is_global=True,
        is_linear=True,
        exact=lambda t: np.atleast_1d(y0 * np.exp(lam * np.asarray(t))),
        exact_deriv=lambda t: np.atleast_1d(lam * y0 * np.exp(lam * np.asarray(t))),
    )


def van_der_pol(mu, t_end=20.0):
    """Van der Pol oscillator x' = y, y' = mu (1 - x^2) y - x from (1, 1)."""
    mu = float(mu)
    if mu <= 0:
        raise ValueError("mu must be positive")

    def f(t, y):
        x, v = y
        return np.array([v, mu * (1.0 - x * x) * v - x])

    def jac(t, y):
        x, v = y
        return np.array([[0.0, 1.0], [-2.0 * mu * x * v - 1.0, mu * (1.0 - x * x)]])

    # coarse Jacobian bound over the box |x| <= 2.5, |y| <= 2 mu + 1; the
    # nonlinearity is polynomial so no global Lipschitz constant exists
    bx, by = 2.5, 2.0 * max(mu, 1.0) + 1.0
    l_local = sqrt(1.0 + (2.0 * mu * bx * by + 1.0) ** 2 + (mu * (1.0 + bx * bx)) ** 2)
    return OdeProblem(
        name="vdp",
        dim=2,
        t0=0.0,
        t_end=float(t_end),
        y0=np.array([1.0, 1.0]),
        f=f,
        jac_y=jac,
        f_t=lambda t, y: np.zeros(2),
        residual_weight=NormWeight(),
        lipschitz_L1=l_local,
        lipschitz_is_global=False,
    )


def van_der_pol_eps(eps, stretch=False, t_end=3.0):
    """Singular form x' = y, eps y' = (1 - x^2) y - x from (1, 1).

    With ``stretch`` the horizon is multiplied by 1/eps and the right-hand
    side scaled by eps (the substitution t -> t/eps), which leaves the
    trajectory unchanged up to that time rescaling.
    """
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    scale = eps if stretch else 1.0
    horizon = t_end / eps if stretch else t_end

    def f(t, y):
        x, v = y
        return scale * np.array([v, ((1.0 - x * x) * v - x) / eps])

    def jac(t, y):
        x, v = y
        return scale * np.array([[0.0, 1.0], [(-2.0 * x * v - 1.0) / eps, (1.0 - x * x) / eps]])

    bx, by = 2.5, 2.0 / sqrt(eps) + 1.0
    l_local = scale * sqrt(1.0 + ((2.0 * bx * by + 1.0) / eps) ** 2 + ((1.0 + bx * bx) / eps) ** 2)
    return OdeProblem(
        name="vdp-eps",
        dim=2,
        t0=0.0,
        t_end=float(horizon),
        y0=np.array([1.0, 1.0]),
        f=f,
        jac_y=jac,
        f_t=lambda t, y: np.zeros(2),
        residual_weight=NormWeight(),
        lipschitz_L1=l_local,
        lipschitz_is_global=False,
    )


def predator_prey(alpha=1.1, beta=0.4, gamma=0.4, delta=0.1, t_end=20.0):
    """Lotka-Volterra system x' = a x - b x y, y' = -g y + d x y from (10, 10)."""
    if min(alpha, beta, gamma, delta) <= 0:
        raise ValueError("parameters must be positive")

    def f(t, y):
        x, v = y
        return np.array([alpha * x - beta * x * v, -gamma * v + delta * x * v])

    def jac(t, y):
        x, v = y
        return np.array([[alpha - beta * v, -beta * x], [delta * v, delta * x - gamma]])

    bx = by = 35.0  # box bound for the closed Lotka-Volterra orbits from (10, 10)
    l_local = sqrt((alpha + beta * by) ** 2 + (beta * bx) ** 2 + (delta * by) ** 2 + (delta * bx + gamma) ** 2)
    return OdeProblem(
        name="predator-prey",
        dim=2,
        t0=0.0,
        t_end=float(t_end),
        y0=np.array([10.0, 10.0]),
        f=f,
        jac_y=jac,
        f_t=lambda t, y: np.zeros(2),
        residual_weight=NormWeight(),
        lipschitz_L1=l_local,
        lipschitz_is_global=False,
    )


# -- heat equation on the unit square ----------------------------------------


@dataclass(eq=False)
class HeatSemiDiscretization:
    """P1 finite elements on a uniform right-triangle mesh of [0, 1]^2.

    Full matrices keep all nodes (for sanity checks); the reduced matrices
    have the homogeneous Dirichlet boundary nodes eliminated and are SPD.
    """

    h: float
    n: int
    d: int
    M_full: np.ndarray
    A_full: np.ndarray
    M: np.ndarray
    A: np.ndarray
    load: np.ndarray
    interior: np.ndarray
    n_nodes: int
    tri: np.ndarray
    grads: np.ndarray
    areas: np.ndarray

    def __post_init__(self):
        self._lu_M = lu_factor(self.M)
        self._full_index = np.full(self.n_nodes, -1, dtype=int)
        self._full_index[self.interior] = np.arange(self.d)

    def solve_mass(self, rhs):
        return lu_solve(self._lu_M, rhs)

    def scatter(self, y):
        u = np.zeros(self.n_nodes)
        u[self.interior] = y
        return u

    def _triangle_gradients(self, y):
        u = self.scatter(y)
        return np.einsum("tij,tj->ti", self.grads, u[self.tri])

    def nonlinear_stiffness(self, y):
        """N(y): weak form of the flux (1 + exp(-|grad u|^2)) grad u."""
        g = self._triangle_gradients(y)
        coef = 1.0 + np.exp(-np.sum(g * g, axis=1))
        flux = (self.areas * coef)[:, None] * g
        contrib = np.einsum("tik,ti->tk", self.grads, flux)
        out = np.zeros(self.n_nodes)
        np.add.at(out, self.tri, contrib)
        return out[self.interior]

    def nonlinear_jacobian(self, y):
        """dN/dy, symmetric because the flux is the gradient of an energy."""
        g = self._triangle_gradients(y)
        e = np.exp(-np.sum(g * g, axis=1))
        W = (1.0 + e)[:, None, None] * np.eye(2) - 2.0 * e[:, None, None] * g[:, :, None] * g[:, None, :]
        blocks = self.areas[:, None, None] * np.einsum("tki,tkl,tlj->tij", self.grads, W, self.grads)
        full = np.zeros((self.n_nodes, self.n_nodes))
        rows = np.repeat(self.tri[:, :, None], 3, axis=2)
        cols = np.repeat(self.tri[:, None, :], 3, axis=1)
        np.add.at(full, (rows, cols), blocks)
        return full[np.ix_(self.interior, self.interior)]


def _unit_square_p1(n):
    """Node coordinates, triangles, per-triangle basis gradients and areas."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    coords = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            v00, v10 = nid(i, j), nid(i + 1, j)
            v01, v11 = nid(i, j + 1), nid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    tri = np.array(tris, dtype=int)

    p0 = coords[tri[:, 0]]
    E = np.stack([coords[tri[:, 1]] - p0, coords[tri[:, 2]] - p0], axis=2)  # columns are edges
    det = E[:, 0, 0] * E[:, 1, 1] - E[:, 0, 1] * E[:, 1, 0]
    areas = 0.5 * np.abs(det)
    Einv = np.empty_like(E)
    Einv[:, 0, 0] = E[:, 1, 1] / det
    Einv[:, 0, 1] = -E[:, 0, 1] / det
    Einv[:, 1, 0] = -E[:, 1, 0] / det
    Einv[:, 1, 1] = E[:, 0, 0] / det
    ref_grads = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    grads = np.einsum("tji,jk->tik", Einv, ref_grads)  # (tri, 2, 3): columns grad phi

    boundary = (
        np.isclose(coords[:, 0], 0.0)
        | np.isclose(coords[:, 0], 1.0)
        | np.isclose(coords[:, 1], 0.0)
        | np.isclose(coords[:, 1], 1.0)
    )
    interior = np.flatnonzero(~boundary)
    return coords, tri, grads, areas, interior


def assemble_heat(h_target, nonlinear=False, t_end=1.0):
    """Semi-discretized heat equation on [0,1]^2 with u0 = 1 projected in L2.

    Returns the OdeProblem together with the underlying discretization. The
    linear right-hand side is -M^{-1} A y with A the SPD stiffness matrix;
    the nonlinear variant uses the flux (1 + exp(-|grad u|^2)) grad u.
    """
    n = int(round(1.0 / float(h_target)))
    if n < 2:
        raise ValueError("mesh size leaves no interior nodes")
    h = 1.0 / n
    coords, tri, grads, areas, interior = _unit_square_p1(n)
    n_nodes = coords.shape[0]
    d = interior.size

    mass_tpl = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    Me = areas[:, None, None] * mass_tpl
    Ke = areas[:, None, None] * np.einsum("tki,tkj->tij", grads, grads)
    M_full = np.zeros((n_nodes, n_nodes))
    A_full = np.zeros((n_nodes, n_nodes))
    rows = np.repeat(tri[:, :, None], 3, axis=2)
    cols = np.repeat(tri[:, None, :], 3, axis=1)
    np.add.at(M_full, (rows, cols), Me)
    np.add.at(A_full, (rows, cols), Ke)
    load_full = np.zeros(n_nodes)
    np.add.at(load_full, tri, np.repeat(areas[:, None] / 3.0, 3, axis=1))

    idx = np.ix_(interior, interior)
    semi = HeatSemiDiscretization(
        h=h,
        n=n,
        d=d,
        M_full=M_full,
        A_full=A_full,
        M=M_full[idx],
        A=A_full[idx],
        load=load_full[interior],
        interior=interior,
        n_nodes=n_nodes,
        tri=tri,
        grads=grads,
        areas=areas,
    )

    y0 = semi.solve_mass(semi.load)  # L2 projection of u0 = 1
    weight = NormWeight(variant="mass", M=semi.M, A=semi.A, h_space=h, d_space=2)
    lip = _mass_whitened_norm(semi)

    if not nonlinear:
        minv_a = semi.solve_mass(semi.A)

        problem = OdeProblem(
            name="heat-linear",
            dim=d,
            t0=0.0,
            t_end=float(t_end),
            y0=y0,
            f=lambda t, y: -(minv_a @ y),
            jac_y=lambda t, y: -minv_a,
            f_t=lambda t, y: np.zeros(d),
            residual_weight=weight,
            lipschitz_L1=lip,
            lipschitz_is_global=True,
            is_linear=True,
        )
    else:

        def f(t, y):
            return -semi.solve_mass(semi.nonlinear_stiffness(y))

        def jac(t, y):
            return -semi.solve_mass(semi.nonlinear_jacobian(y))

        # flux coefficient matrix has eigenvalues in (-2, 2], so dN/dy is
        # bounded by twice the linear stiffness globally
        problem = OdeProblem(
            name="heat-nonlinear",
            dim=d,
            t0=0.0,
            t_end=float(t_end),
            y0=y0,
            f=f,
            jac_y=jac,
            f_t=lambda t, y: np.zeros(d),
            residual_weight=weight,
            lipschitz_L1=2.0 * lip,
            lipschitz_is_global=True,
        )
    return problem, semi


def _mass_whitened_norm(semi, iters=80):
    """Spectral norm of A M^{-1} (Lipschitz constant in the My.My norm)."""
    x = np.ones(semi.d)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = semi.solve_mass(semi.A @ (semi.A @ semi.solve_mass(x)))
        lam = float(x @ y)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
    return sqrt(max(lam, 0.0))


# -- registry ----------------------------------------------------------------

PROBLEM_NAMES = ("linear", "vdp", "vdp-eps", "predator-prey", "heat-linear", "heat-nonlinear")


def make_problem(name, **params):
    """Build a benchmark problem by registry name with parameter overrides."""
    if name == "linear":
        params.setdefault("lam", -1.0)
        return linear_test(**params)
    if name == "vdp":
        params.setdefault("mu", 10.0)
        return van_der_pol(**params)
    if name == "vdp-eps":
        params.setdefault("eps", 1e-6)
        return van_der_pol_eps(**params)
    if name == "predator-prey":
        return predator_prey(**params)
    if name == "heat-linear":
        params.setdefault("h_target", 0.1)
        return assemble_heat(nonlinear=False, **params)[0]
    if name == "heat-nonlinear":
        params.setdefault("h_target", 0.1)
        return assemble_heat(nonlinear=True, **params)[0]
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
