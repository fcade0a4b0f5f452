"""Sub-level sets ``{c(x, y1) - c(x, y2) = a}`` of a cost, and their convexity.

For the inverse-quadratic cost the field is taken literally as
``|x - y2|^-2 - |x - y1|^-2 - a``; for every other cost it is
``c(x, y1) - c(x, y2) - a``.  An orientation pass probes the far field to
decide which side is bounded and flips the sign so that the bounded side is
``{psi < 0}``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cost_models import EXCLUSION_RADIUS, CostModel, PowerCost, mu_matrix
from .diff_geometry import (
    ImplicitSurface,
    Polyline2D,
    ConvexityVerdict,
    polyline_convexity,
    shape_matrix,
    tangent_basis,
)
from .errors import (
    DegenerateGradientError,
    EmptyLevelSetError,
    LostCurveError,
    NonTangentError,
    OffSurfaceError,
    SingularPointError,
    UnboundedLevelSetWarning,
)

FIGURE2_SETS = {
    1: {"a": -2.0, "y1": (-1e-3, 0.0), "y2": (-1.0, -1e-2)},
    2: {"a": 1.0, "y1": (-1e-1, -1e-1), "y2": (1.0, 1e-2)},
    3: {"a": -1.0, "y1": (-1e-4, 0.0), "y2": (1.1, -1e-1)},
}


@dataclass(frozen=True)
class SublevelSpec:
    model: CostModel
    y1: np.ndarray
    y2: np.ndarray
    a: float

    def __post_init__(self):
        object.__setattr__(self, "y1", np.asarray(self.y1, dtype=float))
        object.__setattr__(self, "y2", np.asarray(self.y2, dtype=float))
        if np.array_equal(self.y1, self.y2):
            raise ValueError("foci must differ")

    @property
    def inverse_quadratic(self) -> bool:
        return isinstance(self.model, PowerCost) and self.model.p == -2


def _invquad_fields(y1, y2, a):
    def psi(x):
        r1 = np.sum((x - y1) ** 2, axis=-1)
        r2 = np.sum((x - y2) ** 2, axis=-1)
        return 1.0 / r2 - 1.0 / r1 - a

    def grad(x):
        u1, u2 = x - y1, x - y2
        return -2 * u2 / (u2 @ u2) ** 2 + 2 * u1 / (u1 @ u1) ** 2

    def hess(x):
        # D^2 |u|^-2 = -2 |u|^-4 I + 8 |u|^-6 u u^T
        d = len(x)

        def h(u):
            s = u @ u
            return -2 / s**2 * np.eye(d) + 8 / s**3 * np.outer(u, u)

        return h(x - y2) - h(x - y1)

    return psi, grad, hess


def _cost_fields(model: CostModel, y1, y2, a):
    def psi(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            try:
                return model.c(x, y1) - model.c(x, y2) - a
            except SingularPointError:
                return np.nan
        flat = x.reshape(-1, x.shape[-1])
        out = np.array([psi(row) for row in flat])
        return out.reshape(x.shape[:-1])

    def grad(x):
        return model.c_x(x, y1) - model.c_x(x, y2)

    def hess(x):
        return model.c_xx(x, y1) - model.c_xx(x, y2)

    return psi, grad, hess


def raw_fields(spec: SublevelSpec):
    if spec.inverse_quadratic:
        return _invquad_fields(spec.y1, spec.y2, spec.a)
    return _cost_fields(spec.model, spec.y1, spec.y2, spec.a)


def level_offset_through(spec: SublevelSpec, z) -> float:
    """The offset ``a`` for which the level set of ``spec``'s family passes through ``z``."""
    z = np.asarray(z, dtype=float)
    if spec.inverse_quadratic:
        return float(1.0 / np.sum((z - spec.y2) ** 2) - 1.0 / np.sum((z - spec.y1) ** 2))
    return float(spec.model.c(z, spec.y1) - spec.model.c(z, spec.y2))


def _far_field_signs(psi, center, radius, d, n=64):
    if d == 2:
        th = 2 * np.pi * np.arange(n) / n
        dirs = np.column_stack([np.cos(th), np.sin(th)])
    else:
        g = np.random.default_rng(0).standard_normal((n, d))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    with np.errstate(all="ignore"):
        vals = psi(center + radius * dirs)
    return np.sign(vals[np.isfinite(vals)])


def _grid(box_lo, box_hi, per_axis):
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(box_lo, box_hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(box_lo))


def build_sublevel_psi(spec: SublevelSpec, box=None, per_axis: int = 81) -> ImplicitSurface:
    """Oriented surface for the level set of ``spec``.

    The bounded side is the sign opposite to the far field; if the far field
    changes sign the level set is unbounded and an
    :class:`UnboundedLevelSetWarning` is emitted (orientation then keeps the
    raw sign).  The interior probe is the midpoint of the foci if it lies on
    the bounded side, otherwise the most interior grid point outside the
    exclusion balls around the foci.
    """
    d = len(spec.y1)
    if box is None:
        box = (np.full(d, -2.0), np.full(d, 2.0))
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    psi, grad, hess = raw_fields(spec)

    center = 0.5 * (spec.y1 + spec.y2)
    far = 1e3 * (1.0 + float(np.linalg.norm(hi - lo)) + float(np.linalg.norm(spec.y1 - spec.y2)))
    signs = _far_field_signs(psi, center, far, d)
    bounded = len(signs) > 0 and np.all(signs == signs[0]) and signs[0] != 0
    if bounded:
        orientation = int(signs[0])  # flip so the far field is positive
    else:
        orientation = 1
        warnings.warn("level set is unbounded (far field changes sign)", UnboundedLevelSetWarning)

    def oriented(x):
        with np.errstate(all="ignore"):
            return orientation * psi(x)

    if oriented(center) < 0 and min(np.linalg.norm(center - spec.y1), np.linalg.norm(center - spec.y2)) > EXCLUSION_RADIUS:
        probe = center
    else:
        pts = _grid(lo, hi, per_axis)
        keep = (np.linalg.norm(pts - spec.y1, axis=1) > EXCLUSION_RADIUS) & (
            np.linalg.norm(pts - spec.y2, axis=1) > EXCLUSION_RADIUS
        )
        pts = pts[keep]
        vals = oriented(pts)
        ok = np.isfinite(vals) & (vals < 0)
        if not ok.any():
            raise EmptyLevelSetError("no point of the sub-level region found in the domain box")
        # prefer the probe deepest inside in the distance-like sense
        g = np.array([np.linalg.norm(grad(x)) for x in pts[ok]])
        probe = pts[ok][int(np.argmin(vals[ok] / np.maximum(g, 1e-300)))]

    return ImplicitSurface(
        psi_fn=psi,
        grad_fn=grad,
        hess_fn=hess,
        dim=d,
        interior=np.asarray(probe, dtype=float),
        box=(lo, hi),
        orientation=orientation,
        name=f"sublevel(a={spec.a:g})",
        meta={"bounded": bool(bounded), "y1": spec.y1.tolist(), "y2": spec.y2.tolist(), "a": spec.a},
    )


def tangential_hessian_min(surface: ImplicitSurface, x) -> float:
    """Smallest eigenvalue of the oriented Hessian restricted to the tangent space."""
    x = np.asarray(x, dtype=float)
    g = surface.grad(x)
    gn = float(np.linalg.norm(g))
    if gn < 1e-10:
        raise DegenerateGradientError(f"|grad psi| = {gn:.3e}")
    T = tangent_basis(g / gn)
    H = T @ surface.hess(x) @ T.T
    return float(np.linalg.eigvalsh(0.5 * (H + H.T))[0])


def closed_form_tangential_hessian_invquad(y1, y2, a: float, x, tau) -> float:
    """Closed-form tangential second derivative of ``|x-y2|^-2 - |x-y1|^-2 - a``.

    Valid only on the level set and for tangent ``tau``; it uses the level
    identity ``|x-y2|^-2 = |x-y1|^-2 + a`` to eliminate ``y2``.
    """
    y1, y2, x, tau = (np.asarray(v, dtype=float) for v in (y1, y2, x, tau))
    psi, grad, _ = _invquad_fields(y1, y2, a)
    val = float(psi(x))
    scale = 1.0 / np.sum((x - y1) ** 2) + 1.0 / np.sum((x - y2) ** 2) + abs(a)
    if abs(val) > 1e-8 * max(1.0, scale):
        raise OffSurfaceError(f"psi(x) = {val:.3e}: x is not on the level set")
    g = grad(x)
    if abs(float(np.linalg.norm(tau)) - 1) > 1e-8 or abs(float(tau @ g)) > 1e-8 * float(np.linalg.norm(g)):
        raise NonTangentError("tau must be a unit tangent vector")
    u = x - y1
    s1 = float(u @ u)
    k = 1.0 / s1 + a
    if k <= 0:
        raise ValueError("1/|x-y1|^2 + a must be positive")
    return 2 / s1**2 - 2 * k**2 - 8 * float(u @ tau) ** 2 / s1**3 * a / k


def swap_foci(y1, y2, a):
    """Relabeling with the same level set: ``(y1, y2, a) -> (y2, y1, -a)`` negates ``psi``."""
    return y2, y1, -a


# --- tracing --------------------------------------------------------------


def _correct(surface: ImplicitSurface, x, tol: float, maxiter: int = 30):
    for k in range(maxiter):
        val = float(surface.psi(x))
        if not np.isfinite(val):
            return x, maxiter + 1
        g = surface.grad(x)
        gg = float(g @ g)
        if abs(val) <= tol:
            return x, k
        if gg == 0 or not np.isfinite(gg):
            return x, maxiter + 1
        x = x - val * g / gg
    return x, maxiter + 1


def trace_level_curve_2d(
    surface: ImplicitSurface,
    seed,
    step: float = 0.01,
    tol: float = 1e-12,
    min_step: float = 1e-6,
    max_points: int = 200_000,
    box=None,
) -> Polyline2D:
    """Predictor-corrector march along ``{psi = 0}`` in the plane.

    The predictor moves ``step`` along the counterclockwise tangent and the
    corrector applies Newton projections along the gradient.  The step is
    halved whenever the corrector needs more than 5 iterations.  The march
    stops when it returns near the start heading the same way (closed curve)
    or leaves the box (open curve).
    """
    if surface.dim != 2:
        raise ValueError("tracing is implemented for d = 2 only")
    lo, hi = (np.asarray(b, dtype=float) for b in (box if box is not None else surface.box))
    x0, iters = _correct(surface, np.asarray(seed, dtype=float), tol)
    if iters > 30:
        raise LostCurveError("corrector failed at the seed point")

    def tangent(x):
        g = surface.grad(x)
        n = g / np.linalg.norm(g)
        return np.array([-n[1], n[0]])

    t0 = tangent(x0)
    pts = [x0]
    x, arc, h = x0, 0.0, step
    while len(pts) < max_points:
        t = tangent(x)
        while True:
            xn, iters = _correct(surface, x + h * t, tol)
            if iters <= 5 and np.linalg.norm(xn - x) < 2 * h:
                break
            h *= 0.5
            if h < min_step:
                raise LostCurveError(f"corrector diverged near {x}")
        arc += float(np.linalg.norm(xn - x))
        x = xn
        if h < step and iters <= 2:
            h = min(step, 2 * h)
        if np.any(x < lo) or np.any(x > hi):
            pts.append(x)
            return Polyline2D(np.array(pts), closed=False)
        back = x0 - x
        dist = float(np.linalg.norm(back))
        if arc > 3 * step and dist < 1.5 * step and float(tangent(x) @ t0) > 0 and float(back @ tangent(x)) > -0.5 * step:
            if dist >= 0.5 * step:
                pts.append(x)
            return Polyline2D(np.array(pts), closed=True)
        pts.append(x)
    raise LostCurveError("curve did not close within the point budget")


def find_seed_2d(surface: ImplicitSurface, direction=(1.0, 0.0)) -> np.ndarray:
    """A point on the curve: bisection along a ray from the interior probe."""
    from .diff_geometry import ray_boundary_points

    u = np.asarray(direction, dtype=float)
    return ray_boundary_points(surface, (u / np.linalg.norm(u))[None])[0]


def trace_sublevel(spec: SublevelSpec, step: float = 0.01, box=None) -> tuple:
    surface = build_sublevel_psi(spec, box=box)
    seed = find_seed_2d(surface)
    return surface, trace_level_curve_2d(surface, seed, step=step, box=_trace_box(surface, box))


def _trace_box(surface, box):
    if box is not None:
        return box
    lo, hi = surface.box
    pad = 0.5 * (np.asarray(hi) - np.asarray(lo))
    return (np.asarray(lo) - pad, np.asarray(hi) + pad)


# --- c-convexity ----------------------------------------------------------


@dataclass(frozen=True)
class CImageVerdict:
    convex: bool
    image: ConvexityVerdict
    mu_image: ConvexityVerdict
    mu: np.ndarray
    agree: bool


def c_image_convexity(model: CostModel, boundary: Polyline2D, y0, anchor: int = 0) -> CImageVerdict:
    """Convexity of ``c_y(U, y0)`` from the image of the boundary polyline.

    Also checks the image under ``mu = [c_{y,x}(x_anchor, y0)]^{-1}``, a
    fixed invertible linear map, which must return the same verdict.
    """
    y0 = np.asarray(y0, dtype=float)
    image = np.array([model.c_y(x, y0) for x in boundary.points])
    mu = mu_matrix(model, boundary.points[anchor], y0)
    v1 = polyline_convexity(Polyline2D(image, closed=True))
    v2 = polyline_convexity(Polyline2D(image @ mu.T, closed=True))
    return CImageVerdict(v1.convex, v1, v2, mu, v1.convex == v2.convex)


def min_curvature_along(surface: ImplicitSurface, points) -> np.ndarray:
    return np.array([np.linalg.eigvalsh(shape_matrix(surface, x))[0] for x in points])
