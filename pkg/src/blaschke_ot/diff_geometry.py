"""Oriented implicit hypersurfaces and their extrinsic curvature.

A surface is the zero set of a scalar field ``psi`` whose negative side is a
bounded convex region.  The orientation flag multiplies the raw field so
that ``grad psi / |grad psi|`` is always the outward normal.

The second fundamental form is computed from the implicit formula
``II(v) = v^T D^2 psi v / |grad psi|`` for unit tangent ``v``, which equals
``-d^2_v r . n`` for any local parametrization ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateGradientError,
    GaussInversionError,
    NonTangentError,
    OffSurfaceError,
    OpenCurveError,
    TooFewPointsError,
)

ON_SURFACE_TOL = 1e-6
GRAD_EPS = 1e-10
TANGENT_TOL = 1e-8


def _fd_hessian(grad: Callable, x: np.ndarray) -> np.ndarray:
    h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
    d = len(x)
    H = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class ImplicitSurface:
    """Zero set of ``orientation * psi_fn`` bounding ``{psi < 0}``.

    ``psi_fn`` must accept arrays of shape ``(..., d)``; ``grad_fn`` and
    ``hess_fn`` need only handle a single point.  ``interior`` is a point of
    the bounded region used to start ray searches.
    """

    psi_fn: Callable
    grad_fn: Callable
    dim: int
    interior: np.ndarray
    box: tuple
    hess_fn: Optional[Callable] = None
    orientation: int = 1
    name: str = "surface"
    meta: dict = field(default_factory=dict, compare=False)

    def psi(self, x):
        return self.orientation * self.psi_fn(np.asarray(x, dtype=float))

    def grad(self, x) -> np.ndarray:
        return self.orientation * np.asarray(self.grad_fn(np.asarray(x, dtype=float)), dtype=float)

    def hess(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hess_fn is None:
            return _fd_hessian(self.grad, x)
        return self.orientation * np.asarray(self.hess_fn(x), dtype=float)

    def with_orientation(self, orientation: int) -> "ImplicitSurface":
        return ImplicitSurface(
            self.psi_fn, self.grad_fn, self.dim, self.interior, self.box,
            self.hess_fn, orientation, self.name, self.meta,
        )

    def translated(self, t) -> "ImplicitSurface":
        t = np.asarray(t, dtype=float)
        f, g, h = self.psi_fn, self.grad_fn, self.hess_fn
        lo, hi = self.box
        return ImplicitSurface(
            lambda x: f(x - t),
            lambda x: g(x - t),
            self.dim,
            self.interior + t,
            (np.asarray(lo) + t, np.asarray(hi) + t),
            None if h is None else (lambda x: h(x - t)),
            self.orientation,
            self.name + "+t",
            self.meta,
        )

    def scaled(self, s: float, about=None) -> "ImplicitSurface":
        """Homothetic copy ``c + s (X - c)``, with ``psi`` rescaled by ``s``."""
        s = float(s)
        c = np.zeros(self.dim) if about is None else np.asarray(about, dtype=float)
        f, g, h = self.psi_fn, self.grad_fn, self.hess_fn
        lo, hi = self.box
        return ImplicitSurface(
            lambda x: s * f(c + (x - c) / s),
            lambda x: g(c + (x - c) / s),
            self.dim,
            c + s * (self.interior - c),
            (c + s * (np.asarray(lo) - c), c + s * (np.asarray(hi) - c)),
            None if h is None else (lambda x: h(c + (x - c) / s) / s),
            self.orientation,
            f"{self.name}*{s:g}",
            self.meta,
        )


def sphere(center, radius: float) -> ImplicitSurface:
    """``|x - center|^2 - radius^2``; a circle in d = 2."""
    c = np.asarray(center, dtype=float)
    d = len(c)
    r = float(radius)
    return ImplicitSurface(
        psi_fn=lambda x: np.sum((x - c) ** 2, axis=-1) - r * r,
        grad_fn=lambda x: 2 * (x - c),
        hess_fn=lambda x: 2 * np.eye(d),
        dim=d,
        interior=c.copy(),
        box=(c - 1.5 * r, c + 1.5 * r),
        name=f"sphere(r={r:g})",
    )


def ellipsoid(center, axes) -> ImplicitSurface:
    """``sum((x_i - c_i)^2 / a_i^2) - 1``."""
    c = np.asarray(center, dtype=float)
    a = np.asarray(axes, dtype=float)
    inv2 = 1.0 / a ** 2
    return ImplicitSurface(
        psi_fn=lambda x: np.sum((x - c) ** 2 * inv2, axis=-1) - 1.0,
        grad_fn=lambda x: 2 * (x - c) * inv2,
        hess_fn=lambda x: np.diag(2 * inv2),
        dim=len(c),
        interior=c.copy(),
        box=(c - 1.5 * a, c + 1.5 * a),
        name=f"ellipsoid(axes={a.tolist()})",
    )


@dataclass(frozen=True)
class TangentFrame:
    point: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray  # rows are orthonormal tangent vectors

    def __post_init__(self):
        basis = np.vstack([self.normal, self.tangents])
        if not np.allclose(basis @ basis.T, np.eye(len(basis)), atol=1e-10):
            raise ValueError("frame vectors are not orthonormal")


def tangent_basis(normal) -> np.ndarray:
    """Orthonormal rows spanning the complement of ``normal``.

    In 2D the tangent is the normal rotated by +90 degrees, so traversal
    along it is counterclockwise around an outward-oriented curve.
    """
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    if len(n) == 2:
        return np.array([[-n[1], n[0]]])
    d = len(n)
    # seed with the coordinate axes least aligned with n for a well-conditioned QR
    order = np.argsort(np.abs(n))
    m = np.column_stack([n] + [np.eye(d)[k] for k in order[: d - 1]])
    q, _ = np.linalg.qr(m)
    t = q[:, 1:].T
    return t - np.outer(t @ n, n)


def project_to_surface(surface: ImplicitSurface, x, steps: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    for _ in range(steps):
        g = surface.grad(x)
        gg = float(g @ g)
        if gg < GRAD_EPS ** 2:
            raise DegenerateGradientError(f"|grad psi| below {GRAD_EPS:g} at {x}")
        x = x - float(surface.psi(x)) * g / gg
    return x


def _surface_point(surface: ImplicitSurface, x, tol: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if abs(float(surface.psi(x))) > tol:
        x = project_to_surface(surface, x)
        if abs(float(surface.psi(x))) > tol:
            raise OffSurfaceError(f"|psi| = {abs(float(surface.psi(x))):.3e} exceeds {tol:g}")
    return x


def _unit_gradient(surface: ImplicitSurface, x):
    g = surface.grad(x)
    gn = float(np.linalg.norm(g))
    if gn < GRAD_EPS:
        raise DegenerateGradientError(f"|grad psi| = {gn:.3e} at {x}")
    return g / gn, gn


def outward_normal(surface: ImplicitSurface, x, tol: float = ON_SURFACE_TOL) -> np.ndarray:
    x = _surface_point(surface, x, tol)
    n, _ = _unit_gradient(surface, x)
    return n


def tangent_frame(surface: ImplicitSurface, x, tol: float = ON_SURFACE_TOL) -> TangentFrame:
    x = _surface_point(surface, x, tol)
    n, _ = _unit_gradient(surface, x)
    return TangentFrame(point=x, normal=n, tangents=tangent_basis(n))


def shape_matrix(surface: ImplicitSurface, x, basis=None) -> np.ndarray:
    """``B H B^T / |grad psi|`` for the rows ``B`` of a tangent basis.

    With an orthonormal basis this is the Weingarten map in that basis.
    Non-unit rows give the bilinear form on those vectors.
    """
    x = np.asarray(x, dtype=float)
    n, gn = _unit_gradient(surface, x)
    B = tangent_basis(n) if basis is None else np.atleast_2d(np.asarray(basis, dtype=float))
    S = B @ surface.hess(x) @ B.T / gn
    return 0.5 * (S + S.T)


def second_fundamental_form(surface: ImplicitSurface, frame: TangentFrame, v) -> float:
    v = np.asarray(v, dtype=float)
    if abs(float(np.linalg.norm(v)) - 1.0) > TANGENT_TOL:
        raise NonTangentError("v must be a unit vector")
    if abs(float(v @ frame.normal)) >= TANGENT_TOL:
        raise NonTangentError(f"v . n = {float(v @ frame.normal):.3e}: v is not tangent")
    _, gn = _unit_gradient(surface, frame.point)
    return float(v @ surface.hess(frame.point) @ v) / gn


def weingarten_spectrum(surface: ImplicitSurface, x, tol: float = ON_SURFACE_TOL) -> np.ndarray:
    """Principal curvatures at ``x`` in ascending order."""
    x = _surface_point(surface, x, tol)
    return np.linalg.eigvalsh(shape_matrix(surface, x))


def principal_directions(surface: ImplicitSurface, x):
    """Principal curvatures and the matching unit tangent vectors (rows)."""
    x = np.asarray(x, dtype=float)
    n, _ = _unit_gradient(surface, x)
    B = tangent_basis(n)
    vals, vecs = np.linalg.eigh(shape_matrix(surface, x, B))
    return vals, vecs.T @ B


# --- Gauss map inversion -------------------------------------------------


def _box_scale(surface: ImplicitSurface) -> float:
    lo, hi = surface.box
    return float(np.linalg.norm(np.asarray(hi) - np.asarray(lo)))


def ray_boundary_points(surface: ImplicitSurface, directions, n_bisect: int = 64) -> np.ndarray:
    """Boundary points hit by rays from ``surface.interior``.

    Vectorized bracketing and bisection; assumes the region is star-shaped
    about the interior point, which holds for convex regions.
    """
    c = np.asarray(surface.interior, dtype=float)
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    if float(surface.psi(c)) >= 0:
        raise GaussInversionError("interior point is not inside the surface")
    lo = np.zeros(len(u))
    hi = np.full(len(u), 0.25 * _box_scale(surface) + 1e-12)
    with np.errstate(all="ignore"):
        for _ in range(60):
            out = surface.psi(c + hi[:, None] * u) > 0
            if out.all():
                break
            lo = np.where(out, lo, hi)
            hi = np.where(out, hi, 2 * hi)
        else:
            raise GaussInversionError("region appears unbounded along some ray")
        for _ in range(n_bisect):
            mid = 0.5 * (lo + hi)
            inside = ~(surface.psi(c + mid[:, None] * u) > 0)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
    return c + (0.5 * (lo + hi))[:, None] * u


def _sphere_directions(d: int, n: int) -> np.ndarray:
    if d == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if d == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = np.pi * (1 + 5 ** 0.5) * k
        s = np.sqrt(1 - z * z)
        return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    g = np.random.default_rng(0).standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _support_search(surface: ImplicitSurface, W: np.ndarray) -> np.ndarray:
    """Coarse-to-fine maximization of ``w . x`` over ray boundary points.

    The coarse ray fan is shared by every row of ``W``; refinement rounds
    are batched across rows.
    """
    d = surface.dim
    n_w = len(W)
    dirs = _sphere_directions(d, 256 if d == 2 else 400)
    pts = ray_boundary_points(surface, dirs)
    U = dirs[np.argmax(W @ pts.T, axis=1)]
    spread = 2 * np.pi / 256 if d == 2 else np.pi / 10
    grid = np.linspace(-1.0, 1.0, 9 if d == 2 else 5)
    offsets = np.array(np.meshgrid(*([grid] * (d - 1)), indexing="ij")).reshape(d - 1, -1).T
    k = len(offsets)
    for _ in range(4 if d == 2 else 6):
        if d == 2:
            perp = np.column_stack([-U[:, 1], U[:, 0]])
            cand = (U[:, None, :] + spread * offsets[None, :, 0:1] * perp[:, None, :]).reshape(-1, 2)
        else:
            cand = np.concatenate([U[i] + spread * offsets @ tangent_basis(U[i]) for i in range(n_w)])
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        pts = ray_boundary_points(surface, cand, n_bisect=48)
        score = np.einsum("ikd,id->ik", pts.reshape(n_w, k, d), W)
        U = cand.reshape(n_w, k, d)[np.arange(n_w), np.argmax(score, axis=1)]
        spread /= 4
    return ray_boundary_points(surface, U)


def _newton_polish(surface: ImplicitSurface, w: np.ndarray, x: np.ndarray, maxiter: int = 50):
    d = surface.dim

    def residual(x, lam):
        g = surface.grad(x)
        return np.concatenate([g - lam * w, [float(surface.psi(x))]]), g

    g = surface.grad(x)
    lam = float(np.linalg.norm(g))
    F, g = residual(x, lam)
    err = float(np.linalg.norm(F))
    J = np.zeros((d + 1, d + 1))
    J[:d, d] = -w
    for _ in range(maxiter):
        if err <= 1e-14 * (1.0 + lam):
            break
        J[:d, :d] = surface.hess(x)
        J[d, :d] = g
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            xn, ln = x + t * step[:d], lam + t * step[d]
            with np.errstate(all="ignore"):
                Fn, gn = residual(xn, ln)
            en = float(np.linalg.norm(Fn))
            if np.isfinite(en) and en < err:
                break
            t *= 0.5
        else:
            break
        small = float(np.linalg.norm(t * step[:d])) <= 1e-15 * (1.0 + float(np.linalg.norm(x)))
        x, lam, F, g, err = xn, ln, Fn, gn, en
        if small:
            break
    return x


def gauss_inverse_many(surface: ImplicitSurface, W, tol: float = 1e-8) -> np.ndarray:
    """Surface points whose outward normals are the unit rows of ``W``.

    Maximizes ``w . x`` over the region, then polishes with Newton on
    ``grad psi(x) = lam w, psi(x) = 0``.  Failure to converge is reported
    as a possible non-convexity witness.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if np.any(np.abs(np.linalg.norm(W, axis=1) - 1.0) > 1e-10):
        raise ValueError("normals must be unit vectors")
    X0 = _support_search(surface, W)
    out = np.empty_like(X0)
    scale = 1.0 + _box_scale(surface)
    for i, (w, x0) in enumerate(zip(W, X0)):
        x = _newton_polish(surface, w, x0)
        g = surface.grad(x)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn) or gn < GRAD_EPS:
            raise GaussInversionError("degenerate gradient at support point")
        miss = float(np.linalg.norm(g / gn - w))
        dist = abs(float(surface.psi(x))) / gn
        if miss > tol or dist > 1e-9 * scale:
            raise GaussInversionError(
                f"normal mismatch {miss:.2e}, distance {dist:.2e} for w={w}; "
                "surface may be non-convex"
            )
        out[i] = x
    return out


def gauss_inverse(surface: ImplicitSurface, w, tol: float = 1e-8) -> np.ndarray:
    """Surface point whose outward normal is the unit vector ``w``."""
    return gauss_inverse_many(surface, np.asarray(w, dtype=float)[None], tol)[0]


# --- Polylines ----------------------------------------------------------


@dataclass(frozen=True)
class Polyline2D:
    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        object.__setattr__(self, "points", pts)
        if len(pts) > 1 and np.any(np.all(np.diff(pts, axis=0) == 0, axis=1)):
            raise ValueError("consecutive points must be distinct")
        if self.closed and len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            raise ValueError("closed polyline must not repeat the first point")

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class ConvexityVerdict:
    convex: bool
    witness: Optional[int]
    orientation: int
    turning: float


def polyline_convexity(curve: Polyline2D, rel_tol: float = 1e-9) -> ConvexityVerdict:
    """Convexity certificate for a closed polyline.

    Convex iff every vertex turns the same way (cross products of the two
    incident edges share one sign, within ``rel_tol`` of the product of
    edge lengths) and the total turning is one full revolution.
    """
    if not curve.closed:
        raise OpenCurveError("convexity is only defined for closed curves")
    pts = curve.points
    if len(pts) < 4:
        raise TooFewPointsError(f"need >= 4 points, got {len(pts)}")
    e_in = pts - np.roll(pts, 1, axis=0)
    e_out = np.roll(pts, -1, axis=0) - pts
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.sum(e_in * e_out, axis=1)
    scale = np.linalg.norm(e_in, axis=1) * np.linalg.norm(e_out, axis=1)
    turn = np.arctan2(cross, dot)
    total = float(turn.sum())
    orientation = 1 if total >= 0 else -1
    bad = np.nonzero(orientation * cross < -rel_tol * scale)[0]
    if len(bad):
        return ConvexityVerdict(False, int(bad[0]), orientation, total)
    if abs(abs(total) - 2 * np.pi) > 1e-6:
        over = np.nonzero(np.abs(np.cumsum(turn)) > 2 * np.pi + 1e-6)[0]
        return ConvexityVerdict(False, int(over[0]) if len(over) else len(pts) - 1, orientation, total)
    return ConvexityVerdict(True, None, orientation, total)
