"""Paraboloids of revolution used as reflector support functions.

``P(x) = sigma/2 + Z - |x - z|^2 / (2 sigma)`` is a downward-opening graph
over ``R^n`` with focus ``(z, Z)``.  One paraboloid is "inside" another when
its graph lies below, so the comparison is a pointwise ordering of heights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diff_geometry import ImplicitSurface, shape_matrix, tangent_basis
from .errors import NotTangentError

TANGENCY_TOL = 1e-9


@dataclass(frozen=True)
class Paraboloid:
    sigma: float
    z: np.ndarray
    z_last: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=float)))

    @property
    def n(self) -> int:
        return len(self.z)

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "z": self.z.tolist(), "z_last": self.z_last}


def paraboloid_eval(par: Paraboloid, x):
    """Value and gradient ``DP = -(x - z) / sigma``."""
    u = np.asarray(x, dtype=float) - par.z
    value = par.sigma / 2 + par.z_last - float(u @ u) / (2 * par.sigma)
    return value, -u / par.sigma


def paraboloid_sff(par: Paraboloid, x) -> np.ndarray:
    """Second fundamental form in graph coordinates, ``delta_ij / (sigma sqrt(1 + |DP|^2))``."""
    _, g = paraboloid_eval(par, x)
    return np.eye(par.n) / (par.sigma * np.sqrt(1.0 + float(g @ g)))


def graph_surface(par: Paraboloid) -> ImplicitSurface:
    """``psi(x, t) = t - P(x)``; the region below the graph is ``{psi < 0}``."""
    n = par.n

    def psi(X):
        x, t = X[..., :n], X[..., n]
        u = x - par.z
        return t - (par.sigma / 2 + par.z_last - np.sum(u * u, axis=-1) / (2 * par.sigma))

    def grad(X):
        return np.concatenate([(X[:n] - par.z) / par.sigma, [1.0]])

    hess_const = np.zeros((n + 1, n + 1))
    hess_const[:n, :n] = np.eye(n) / par.sigma
    top = par.sigma / 2 + par.z_last
    return ImplicitSurface(
        psi_fn=psi,
        grad_fn=grad,
        hess_fn=lambda X: hess_const,
        dim=n + 1,
        interior=np.concatenate([par.z, [top - 1.0]]),
        box=(np.concatenate([par.z - 5, [top - 10]]), np.concatenate([par.z + 5, [top + 1]])),
        name=f"paraboloid(sigma={par.sigma:g})",
    )


def graph_point(par: Paraboloid, x) -> np.ndarray:
    value, _ = paraboloid_eval(par, x)
    return np.concatenate([np.asarray(x, dtype=float), [value]])


def implicit_sff_coordinates(par: Paraboloid, x) -> np.ndarray:
    """The graph-coordinate form recomputed through the implicit-surface machinery.

    Coordinate tangent vectors of the graph are ``(e_i, d_i P)``.
    """
    _, g = paraboloid_eval(par, x)
    B = np.hstack([np.eye(par.n), g[:, None]])
    return shape_matrix(graph_surface(par), graph_point(par, x), B)


def align_paraboloid_tangency(sigma1: float, par2: Paraboloid, x_c) -> Paraboloid:
    """Paraboloid with parameter ``sigma1`` touching ``par2`` to first order at ``x_c``."""
    x_c = np.asarray(x_c, dtype=float)
    if not sigma1 > 0:
        raise ValueError("sigma1 must be positive")
    z1 = x_c - (sigma1 / par2.sigma) * (x_c - par2.z)
    p2, _ = paraboloid_eval(par2, x_c)
    u = x_c - z1
    z_last = p2 - sigma1 / 2 + float(u @ u) / (2 * sigma1)
    return Paraboloid(sigma1, z1, z_last)


def contact_residuals(par1: Paraboloid, par2: Paraboloid, x_c):
    v1, g1 = paraboloid_eval(par1, x_c)
    v2, g2 = paraboloid_eval(par2, x_c)
    return abs(v1 - v2), float(np.max(np.abs(g1 - g2)))


def matched_normal_margin(par1: Paraboloid, par2: Paraboloid, gradients) -> float:
    """Min of ``II_1 - II_2`` over points with equal gradient (hence equal normal).

    The point on ``P`` with gradient ``g`` is ``x = z - sigma g``; the forms
    are compared in one orthonormal tangent basis of the shared normal.
    """
    s1, s2 = graph_surface(par1), graph_surface(par2)
    margin = np.inf
    for g in np.atleast_2d(gradients):
        X1 = graph_point(par1, par1.z - par1.sigma * g)
        X2 = graph_point(par2, par2.z - par2.sigma * g)
        normal = np.concatenate([-g, [1.0]])
        T = tangent_basis(normal / np.linalg.norm(normal))
        diff = shape_matrix(s1, X1, T) - shape_matrix(s2, X2, T)
        margin = min(margin, float(np.linalg.eigvalsh(diff)[0]))
    return margin


@dataclass
class ReflectorVerdict:
    dominance_holds: bool
    ordering_holds: bool
    max_excess: float
    consistent: bool
    equal: bool
    curvature_margin: float
    contact_value_residual: float
    contact_gradient_residual: float
    grid_points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def reflector_inclusion(
    par1: Paraboloid,
    par2: Paraboloid,
    x_c,
    half_width: float = 5.0,
    per_axis: int = 101,
    tol: float = 1e-9,
) -> ReflectorVerdict:
    """Couple the analytic test ``sigma1 <= sigma2`` with a grid check of ``P1 <= P2``."""
    x_c = np.asarray(x_c, dtype=float)
    rv, rg = contact_residuals(par1, par2, x_c)
    if rv > TANGENCY_TOL * (1 + abs(paraboloid_eval(par2, x_c)[0])) or rg > TANGENCY_TOL:
        raise NotTangentError(f"paraboloids are not tangent at x_c (residuals {rv:.2e}, {rg:.2e})")
    n = par1.n
    axes = [np.linspace(-half_width, half_width, per_axis)] * n
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)

    def heights(par):
        u = X - par.z
        return par.sigma / 2 + par.z_last - np.sum(u * u, axis=1) / (2 * par.sigma)

    excess = heights(par1) - heights(par2)
    worst = float(excess.max())
    dominance = par1.sigma <= par2.sigma
    ordering = worst <= tol
    rng = np.random.default_rng(0)
    margin = matched_normal_margin(par1, par2, rng.uniform(-2, 2, (16, n)))
    return ReflectorVerdict(
        dominance_holds=bool(dominance),
        ordering_holds=bool(ordering),
        max_excess=worst,
        consistent=bool((not dominance) or ordering),
        equal=bool(np.max(np.abs(excess)) <= tol),
        curvature_margin=margin,
        contact_value_residual=rv,
        contact_gradient_residual=rg,
        grid_points=len(X),
    )
