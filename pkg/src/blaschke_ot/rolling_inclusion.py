"""Rolling-ball verification: curvature dominance at matched normals vs containment.

Local dominance (second fundamental form of the inner surface at least that
of the outer one at every pair of points with equal outward normals) and
internal tangency should imply global containment.  Here the hypothesis is
scanned on seeded normals, containment is checked independently by sampling
the translated inner surface, and the two are combined into a verdict that
flags any dominance-true / inclusion-false outcome.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .cost_models import CostModel
from .diff_geometry import (
    ImplicitSurface,
    gauss_inverse,
    gauss_inverse_many,
    outward_normal,
    shape_matrix,
    tangent_basis,
)
from .errors import AuditError, GeometryError, NonConvexSublevelError
from .mtw_audit import VIOLATED, SamplerConfig, audit_grid
from .sublevel_geometry import (
    SublevelSpec,
    build_sublevel_psi,
    find_seed_2d,
    level_offset_through,
    tangential_hessian_min,
    trace_level_curve_2d,
    _trace_box,
)
from .diff_geometry import polyline_convexity
from .errors import UnboundedLevelSetWarning

log = logging.getLogger(__name__)

DOMINANCE_TOL = 1e-9
CONTAINMENT_TOL = 1e-7


@dataclass
class InclusionVerdict:
    dominance_holds: bool
    dominance_margin: float
    inclusion_holds: bool
    max_violation: float
    n_normals: int
    n_containment_samples: int
    consistent_with_theorem1: bool
    translation: list = field(default_factory=list)
    witness_normal: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def finding(self) -> bool:
        """Dominance held but containment failed."""
        return self.dominance_holds and not self.inclusion_holds

    def to_dict(self) -> dict:
        return asdict(self)


def random_unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def align_internal_tangency(inner: ImplicitSurface, outer: ImplicitSurface, w) -> np.ndarray:
    """Translation that makes ``inner`` touch ``outer`` at the outer point with normal ``w``."""
    w = np.asarray(w, dtype=float)
    return gauss_inverse(outer, w) - gauss_inverse(inner, w)


@dataclass
class DominanceScan:
    holds: bool
    margin: float
    witness_normal: np.ndarray
    witness_direction: np.ndarray


def curvature_dominance_scan(
    inner: ImplicitSurface,
    outer: ImplicitSurface,
    n_normals: int = 200,
    seed: int = 0,
    n_random_dirs: int = 8,
    tol: float = DOMINANCE_TOL,
) -> DominanceScan:
    """Minimum of ``II_inner - II_outer`` over Gauss-matched points.

    At each sampled normal both forms are evaluated in one shared tangent
    basis, along the basis vectors, along ``n_random_dirs`` random unit
    tangents, and along the bottom eigenvector of the difference (the exact
    minimum over unit tangents).
    """
    d = inner.dim
    rng = np.random.default_rng(seed)
    W = random_unit_vectors(rng, n_normals, d)
    X_in = gauss_inverse_many(inner, W)
    X_out = gauss_inverse_many(outer, W)
    best = (np.inf, None, None)
    for w, xi, xo in zip(W, X_in, X_out):
        T = tangent_basis(w)
        diff = shape_matrix(inner, xi, T) - shape_matrix(outer, xo, T)
        coeffs = [np.eye(d - 1)[k] for k in range(d - 1)]
        for _ in range(n_random_dirs):
            c = rng.standard_normal(d - 1)
            coeffs.append(c / np.linalg.norm(c))
        vals, vecs = np.linalg.eigh(diff)
        coeffs.append(vecs[:, 0])
        for c in coeffs:
            m = float(c @ diff @ c)
            if m < best[0]:
                best = (m, w, c @ T)
    margin, wn, v = best
    return DominanceScan(margin >= -tol, margin, wn, v)


def inclusion_oracle(
    inner: ImplicitSurface,
    translation,
    outer: ImplicitSurface,
    n_samples: int = 400,
    seed: int = 0,
    tol: float = CONTAINMENT_TOL,
):
    """Max of ``psi_outer`` over translated inner-surface samples; inclusion iff <= ``tol``."""
    rng = np.random.default_rng(seed + 1_000_003)
    W = random_unit_vectors(rng, n_samples, inner.dim)
    pts = gauss_inverse_many(inner, W) + np.asarray(translation, dtype=float)
    vals = np.asarray(outer.psi(pts), dtype=float)
    k = int(np.argmax(vals))
    worst = float(vals[k])
    return worst <= tol, worst


def blaschke_verdict(
    inner: ImplicitSurface,
    outer: ImplicitSurface,
    w_contact,
    n_normals: int = 200,
    n_samples: int = 400,
    seed: int = 0,
    dominance_tol: float = DOMINANCE_TOL,
    containment_tol: float = CONTAINMENT_TOL,
) -> InclusionVerdict:
    w = np.asarray(w_contact, dtype=float)
    w = w / np.linalg.norm(w)
    contact = gauss_inverse(outer, w)
    t = contact - gauss_inverse(inner, w)
    # substitution check: the contact lies on the moved inner surface with the same normal
    moved = inner.translated(t)
    g = moved.grad(contact)
    point_gap = abs(float(moved.psi(contact))) / float(np.linalg.norm(g))
    normal_gap = float(np.linalg.norm(outward_normal(moved, contact) - outward_normal(outer, contact)))

    scan = curvature_dominance_scan(inner, outer, n_normals, seed, tol=dominance_tol)
    inside, worst = inclusion_oracle(inner, t, outer, n_samples, seed, containment_tol)
    consistent = (not scan.holds) or inside
    if not consistent:
        log.error("dominance holds but inclusion fails: margin=%g violation=%g", scan.margin, worst)
    return InclusionVerdict(
        dominance_holds=bool(scan.holds),
        dominance_margin=float(scan.margin),
        inclusion_holds=bool(inside),
        max_violation=worst,
        n_normals=n_normals,
        n_containment_samples=n_samples,
        consistent_with_theorem1=bool(consistent),
        translation=t.tolist(),
        witness_normal=np.asarray(scan.witness_normal).tolist(),
        details={
            "contact_point": contact.tolist(),
            "contact_point_gap": point_gap,
            "contact_normal_gap": normal_gap,
        },
    )


# --- random convex curves ---------------------------------------------------


def radial_curve(radius: float, eps, phases, center=(0.0, 0.0)) -> ImplicitSurface:
    """Star curve ``rho = R (1 + sum_k eps_k cos(k theta + phi_k))``, ``psi = rho - r(theta)``."""
    R = float(radius)
    eps = np.asarray(eps, dtype=float)
    phases = np.asarray(phases, dtype=float)
    k = np.arange(1, len(eps) + 1)
    c = np.asarray(center, dtype=float)

    def r(th):
        return R * (1 + np.cos(np.multiply.outer(th, k) + phases) @ eps)

    def dr(th):
        return -R * (np.sin(np.multiply.outer(th, k) + phases) @ (eps * k))

    def ddr(th):
        return -R * (np.cos(np.multiply.outer(th, k) + phases) @ (eps * k**2))

    def psi(x):
        u = x - c
        return np.linalg.norm(u, axis=-1) - r(np.arctan2(u[..., 1], u[..., 0]))

    def grad(x):
        u = x - c
        rho2 = float(u @ u)
        rho = rho2**0.5
        th = np.arctan2(u[1], u[0])
        dth = np.array([-u[1], u[0]]) / rho2
        return u / rho - float(dr(th)) * dth

    def hess(x):
        u = x - c
        X, Y = u
        rho2 = float(u @ u)
        rho = rho2**0.5
        th = np.arctan2(Y, X)
        dth = np.array([-Y, X]) / rho2
        hth = np.array([[2 * X * Y, Y * Y - X * X], [Y * Y - X * X, -2 * X * Y]]) / rho2**2
        hrho = (np.eye(2) - np.outer(u, u) / rho2) / rho
        return hrho - float(ddr(th)) * np.outer(dth, dth) - float(dr(th)) * hth

    th = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    rr, d1, d2 = r(th), dr(th), ddr(th)
    kappa = (rr**2 + 2 * d1**2 - rr * d2) / (rr**2 + d1**2) ** 1.5
    rmax = float(rr.max())
    return ImplicitSurface(
        psi_fn=psi,
        grad_fn=grad,
        hess_fn=hess,
        dim=2,
        interior=c.copy(),
        box=(c - 1.5 * rmax, c + 1.5 * rmax),
        name="radial",
        meta={"min_curvature": float(kappa.min()), "max_curvature": float(kappa.max())},
    )


def random_convex_curve(seed: int, radius: float = 1.0, modes: int = 4, amplitude: float = 0.03) -> ImplicitSurface:
    """Seeded smooth convex curve; resampled until curvature is positive."""
    rng = np.random.default_rng(seed)
    for _ in range(100):
        eps = rng.uniform(0, amplitude, modes)
        phases = rng.uniform(0, 2 * np.pi, modes)
        curve = radial_curve(radius, eps, phases)
        if curve.meta["min_curvature"] > 0.05 / radius:
            return curve
    raise RuntimeError("could not draw a convex curve")


def disk_tangent_inside(outer: ImplicitSurface, w, radius: float) -> ImplicitSurface:
    """Ball of ``radius`` touching ``outer`` from inside at the point with normal ``w``."""
    from .diff_geometry import sphere

    w = np.asarray(w, dtype=float)
    x = gauss_inverse(outer, w)
    return sphere(x - radius * w, radius)


# --- cost sub-level pipeline ----------------------------------------------


@dataclass
class Theorem2Config:
    audit_samples: int = 200
    audit_seed: int = 0
    n_normals: int = 200
    n_samples: int = 400
    seed: int = 0
    step: float = 0.01
    convexity_tol: float = 1e-9
    normal_match_tol: float = 1e-8
    dominance_tol: float = DOMINANCE_TOL
    containment_tol: float = CONTAINMENT_TOL


def sublevel_gates(surface: ImplicitSurface, step: float = 0.01, tol: float = 1e-9, n_check: int = 200):
    """Convexity and positive-curvature gates for a sub-level surface.

    In 2D the curve is traced; in higher dimension the checks run on
    Gauss-inverse samples.  Raises :class:`NonConvexSublevelError`.
    """
    if not surface.meta.get("bounded", True):
        raise NonConvexSublevelError("sub-level set is unbounded")
    if surface.dim == 2:
        curve = trace_level_curve_2d(surface, find_seed_2d(surface), step=step, box=_trace_box(surface, None))
        if not curve.closed:
            raise NonConvexSublevelError("traced level curve did not close")
        verdict = polyline_convexity(curve)
        if not verdict.convex:
            raise NonConvexSublevelError(f"traced curve is non-convex at vertex {verdict.witness}")
        pts = curve.points
    else:
        try:
            pts = gauss_inverse_many(surface, random_unit_vectors(np.random.default_rng(0), n_check, surface.dim))
        except GeometryError as exc:
            raise NonConvexSublevelError(f"Gauss inversion failed: {exc}") from exc
    hmin = min(tangential_hessian_min(surface, x) for x in pts)
    kmin = min(float(np.linalg.eigvalsh(shape_matrix(surface, x))[0]) for x in pts)
    if hmin < -tol:
        raise NonConvexSublevelError(f"tangential Hessian {hmin:.3e} < 0")
    if kmin <= 0:
        raise NonConvexSublevelError(f"principal curvature {kmin:.3e} is not positive")
    kmax = max(float(np.linalg.eigvalsh(shape_matrix(surface, x))[-1]) for x in pts)
    return {
        "points_checked": len(pts),
        "tangential_hessian_min": hmin,
        "min_curvature": kmin,
        "max_curvature": kmax,
    }


def theorem2_pipeline(
    model: CostModel,
    U_boundary: ImplicitSurface,
    y1,
    y2,
    w_contact,
    config: Theorem2Config = Theorem2Config(),
    box=None,
) -> InclusionVerdict:
    """Check the hypotheses, build the sub-level set through the contact, then run the verdict.

    The offset ``a`` is chosen so the level set passes through the point of
    ``U_boundary`` with normal ``w_contact``.  When the sub-level normal there
    differs from ``w_contact`` the sub-level normal is used instead and the
    adjustment is reported in ``details``.
    """
    audit = audit_grid(model, SamplerConfig(), config.audit_samples, config.audit_seed)
    if audit.classification == VIOLATED:
        raise AuditError(f"cost violates weak A3: min tensor value {audit.min_value:.3e}")

    w = np.asarray(w_contact, dtype=float)
    w = w / np.linalg.norm(w)
    z0 = gauss_inverse(U_boundary, w)
    probe = SublevelSpec(model, y1, y2, 0.0)
    a = level_offset_through(probe, z0)
    spec = SublevelSpec(model, y1, y2, a)
    with warnings.catch_warnings():
        warnings.simplefilter("error", UnboundedLevelSetWarning)
        try:
            N = build_sublevel_psi(spec, box=box)
        except UnboundedLevelSetWarning as exc:
            raise NonConvexSublevelError(f"sub-level set is unbounded: {exc}") from exc
    gates = sublevel_gates(N, step=config.step, tol=config.convexity_tol)

    n_z0 = outward_normal(N, z0)
    adjusted = float(np.linalg.norm(n_z0 - w)) > config.normal_match_tol
    w_used = n_z0 if adjusted else w
    verdict = blaschke_verdict(
        U_boundary, N, w_used, config.n_normals, config.n_samples, config.seed,
        config.dominance_tol, config.containment_tol,
    )
    verdict.details.update(
        {
            "a": a,
            "z0": z0.tolist(),
            "contact_normal_requested": w.tolist(),
            "contact_normal_used": w_used.tolist(),
            "contact_normal_adjusted": adjusted,
            "audit": audit.to_dict(),
            "gates": {"weak_a3": True, "sublevel_convex": True, "positive_curvature": True, **gates},
        }
    )
    return verdict
