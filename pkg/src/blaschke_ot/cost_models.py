"""Transport cost functions, their derivatives, and the momentum inversion.

A cost model exposes ``c(x, y)`` together with analytic first and second
derivatives.  Third derivatives ``c_{y, xx}`` default to central differences
of the analytic ``c_xx``; subclasses may override with closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergenceError,
    SegmentThroughZeroError,
    SingularMatrixError,
    SingularPointError,
    ZeroMomentumError,
)

SINGULAR_EPS = 1e-8
EXCLUSION_RADIUS = 0.05
NEWTON_MAXITER = 50
DET_TOL = 1e-12


@dataclass(frozen=True)
class DerivativeBundle:
    """All derivatives of ``c`` at one point pair.

    ``c_yxx[m, i, j]`` is the derivative in ``y_m`` of ``c_{x_i x_j}``.
    ``c_xy[i, j]`` is the mixed derivative in ``x_i`` and ``y_j``.
    """

    c: float
    c_x: np.ndarray
    c_y: np.ndarray
    c_xx: np.ndarray
    c_xy: np.ndarray
    c_yxx: np.ndarray


class CostModel:
    """Base class for costs ``c: R^d x R^d -> R``.

    Subclasses implement ``c``, ``c_x``, ``c_y``, ``c_xx``, ``c_xy`` and
    ``inverse_guess``.  Everything else has a generic numerical default.
    """

    dim: int
    kind: str = "generic"

    def c(self, x, y) -> float:
        raise NotImplementedError

    def c_x(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def c_y(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def c_xx(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def c_xy(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def c_yy(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def inverse_guess(self, x, p_vec) -> np.ndarray:
        """Starting point for the Newton solve of ``c_x(x, y) = p``."""
        raise NotImplementedError

    def check_point(self, x, y) -> None:
        """Raise when ``(x, y)`` is at a singularity of the cost."""

    def third_fd_step(self, x) -> float:
        return 1e-4 * (1.0 + float(np.linalg.norm(x)))

    def c_yxx(self, x, y) -> np.ndarray:
        """Central differences of the analytic ``c_xx`` in each ``y_m``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = self.third_fd_step(x)
        d = len(y)
        out = np.empty((d, d, d))
        for m in range(d):
            e = np.zeros(d)
            e[m] = h
            out[m] = (self.c_xx(x, y + e) - self.c_xx(x, y - e)) / (2 * h)
        return out


@dataclass(frozen=True)
class PowerCost(CostModel):
    """``c(x, y) = |x - y|^p / p``."""

    p: float
    dim: int
    kind: str = "power"
    eps: float = SINGULAR_EPS

    def __post_init__(self):
        if self.p == 0:
            raise ValueError("p = 0 is undefined for the power cost (log cost is not supported)")
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")

    def _diff(self, x, y):
        u = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        r = float(np.linalg.norm(u))
        if r < self.eps:
            raise SingularPointError(f"|x - y| = {r:.3e} below {self.eps:g}")
        return u, r

    def check_point(self, x, y) -> None:
        self._diff(x, y)

    def c(self, x, y) -> float:
        _, r = self._diff(x, y)
        return r ** self.p / self.p

    def c_x(self, x, y) -> np.ndarray:
        u, r = self._diff(x, y)
        return r ** (self.p - 2) * u

    def c_y(self, x, y) -> np.ndarray:
        return -self.c_x(x, y)

    def c_xx(self, x, y) -> np.ndarray:
        u, r = self._diff(x, y)
        p = self.p
        return r ** (p - 2) * np.eye(len(u)) + (p - 2) * r ** (p - 4) * np.outer(u, u)

    def c_yy(self, x, y) -> np.ndarray:
        return self.c_xx(x, y)

    def c_xy(self, x, y) -> np.ndarray:
        return -self.c_xx(x, y)

    def c_yxx_analytic(self, x, y) -> np.ndarray:
        # d/dy_m c_{x_i x_j} = -d/dx_m c_{x_i x_j}
        u, r = self._diff(x, y)
        p = self.p
        eye = np.eye(len(u))
        sym = (
            np.einsum("m,ij->mij", u, eye)
            + np.einsum("i,jm->mij", u, eye)
            + np.einsum("j,im->mij", u, eye)
        )
        third = (p - 2) * r ** (p - 4) * sym + (p - 2) * (p - 4) * r ** (p - 6) * np.einsum(
            "m,i,j->mij", u, u, u
        )
        return -third

    def c_yxx(self, x, y) -> np.ndarray:
        if self.p in (2, -2):
            return self.c_yxx_analytic(x, y)
        return super().c_yxx(x, y)

    def inverse_guess(self, x, p_vec) -> np.ndarray:
        if self.p == 1:
            raise NoConvergenceError("p = 1: |c_x| is constant, momentum inversion is not unique")
        norm = float(np.linalg.norm(p_vec))
        return np.asarray(x, dtype=float) - np.asarray(p_vec, dtype=float) * norm ** (
            (2 - self.p) / (self.p - 1)
        )


def power_cost(p: float, dim: int) -> PowerCost:
    return PowerCost(p=float(p), dim=int(dim))


def derivatives(model: CostModel, x, y) -> DerivativeBundle:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    model.check_point(x, y)
    return DerivativeBundle(
        c=model.c(x, y),
        c_x=model.c_x(x, y),
        c_y=model.c_y(x, y),
        c_xx=model.c_xx(x, y),
        c_xy=model.c_xy(x, y),
        c_yxx=model.c_yxx(x, y),
    )


def solve_y_from_p(model: CostModel, x, p_vec, tol: float = 1e-10, maxiter: int = NEWTON_MAXITER):
    """Find ``y`` with ``c_x(x, y) = p_vec``.

    The closed-form guess is refined by damped Newton iterations on the
    residual ``c_x(x, y) - p_vec`` whose Jacobian in ``y`` is ``c_xy``.
    """
    x = np.asarray(x, dtype=float)
    p_vec = np.asarray(p_vec, dtype=float)
    pnorm = float(np.linalg.norm(p_vec))
    if pnorm == 0.0:
        raise ZeroMomentumError("zero momentum has no preimage at finite distance")
    target = tol * (1.0 + pnorm)

    y = model.inverse_guess(x, p_vec)
    res = model.c_x(x, y) - p_vec
    err = float(np.linalg.norm(res))
    for _ in range(maxiter):
        if err <= target:
            return y
        step = np.linalg.solve(model.c_xy(x, y), res)
        lam = 1.0
        while True:
            y_new = y - lam * step
            try:
                res_new = model.c_x(x, y_new) - p_vec
                err_new = float(np.linalg.norm(res_new))
            except SingularPointError:
                err_new = np.inf
            if err_new < err or lam < 1e-6:
                break
            lam *= 0.5
        if not np.isfinite(err_new):
            break
        y, res, err = y_new, res_new, err_new
    if err <= target:
        return y
    raise NoConvergenceError(f"momentum inversion residual {err:.3e} after {maxiter} iterations")


def mixed_hessian_det(model: CostModel, x, y) -> float:
    """``det c_xy(x, y)``; raises if the matrix is singular."""
    det = float(np.linalg.det(model.c_xy(x, y)))
    if abs(det) < DET_TOL:
        raise SingularMatrixError(f"det c_xy = {det:.3e}: non-degeneracy fails at x={x}, y={y}")
    return det


def mu_matrix(model: CostModel, x, y) -> np.ndarray:
    """Inverse of ``[c_{y_m, x_i}]`` (rows indexed by ``y``)."""
    mixed_hessian_det(model, x, y)
    return np.linalg.inv(model.c_xy(x, y).T)


def _segment_hits_zero(p0, p1, eps: float) -> bool:
    d = p1 - p0
    dd = float(d @ d)
    t = 0.0 if dd == 0 else float(np.clip(-(p0 @ d) / dd, 0.0, 1.0))
    return float(np.linalg.norm(p0 + t * d)) < eps


def c_star_segment(model: CostModel, x0, p0, p1, t: float) -> np.ndarray:
    """Point ``y_t`` on the c*-segment: ``c_x(x0, y_t) = (1 - t) p0 + t p1``."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if isinstance(model, PowerCost) and _segment_hits_zero(p0, p1, model.eps):
        raise SegmentThroughZeroError("momentum segment passes through 0")
    return solve_y_from_p(model, x0, (1 - t) * p0 + t * p1)
