import warnings

import numpy as np
import pytest

from blaschke_ot.cost_models import power_cost
from blaschke_ot.diff_geometry import Polyline2D, polyline_convexity, sphere
from blaschke_ot.errors import (
    EmptyLevelSetError,
    NonTangentError,
    OffSurfaceError,
    UnboundedLevelSetWarning,
)
from blaschke_ot.sublevel_geometry import (
    FIGURE2_SETS,
    SublevelSpec,
    build_sublevel_psi,
    c_image_convexity,
    closed_form_tangential_hessian_invquad,
    find_seed_2d,
    level_offset_through,
    swap_foci,
    tangential_hessian_min,
    trace_level_curve_2d,
    trace_sublevel,
)


def invquad_psi(x, y1, y2, a):
    """Reference field written out independently of the package."""
    return 1.0 / np.sum((x - y2) ** 2) - 1.0 / np.sum((x - y1) ** 2) - a


def fd_directional_second(f, x, v, h):
    def d2(s):
        return (f(x + s * v) - 2 * f(x) + f(x - s * v)) / s**2

    return (4 * d2(h) - d2(2 * h)) / 3


def figure2_spec(k):
    s = FIGURE2_SETS[k]
    return SublevelSpec(power_cost(-2, 2), s["y1"], s["y2"], s["a"])


@pytest.fixture(scope="module")
def figure2_traces():
    return {k: trace_sublevel(figure2_spec(k)) for k in FIGURE2_SETS}


def on_set_samples(traces, n_total=500, seed=0):
    """(set, point, unit tangent) triples drawn from the traced Figure-2 curves."""
    rng = np.random.default_rng(seed)
    out = []
    keys = sorted(traces)
    for i in range(n_total):
        k = keys[i % len(keys)]
        surface, curve = traces[k]
        x = curve.points[rng.integers(len(curve.points))]
        g = surface.grad(x)
        tau = np.array([-g[1], g[0]]) / np.linalg.norm(g)
        out.append((k, x, tau))
    return out


def test_spec_rejects_coincident_foci():
    with pytest.raises(ValueError):
        SublevelSpec(power_cost(-2, 2), [0.0, 0.0], [0.0, 0.0], 1.0)


def test_inverse_quadratic_field_is_literal():
    spec = figure2_spec(1)
    s = build_sublevel_psi(spec)
    x = np.array([0.3, 0.4])
    assert s.psi(x) == pytest.approx(s.orientation * invquad_psi(x, spec.y1, spec.y2, spec.a), rel=1e-14)


def test_general_cost_field():
    spec = SublevelSpec(power_cost(-1, 2), [0.0, 0.0], [1.0, 0.5], -0.3)
    s = build_sublevel_psi(spec)
    x = np.array([0.2, -0.7])
    m = spec.model
    raw = m.c(x, spec.y1) - m.c(x, spec.y2) - spec.a
    assert s.psi(x) == pytest.approx(s.orientation * raw, rel=1e-14)


def test_level_offset_through():
    spec = figure2_spec(2)
    z = np.array([0.4, -0.3])
    a = level_offset_through(spec, z)
    assert invquad_psi(z, spec.y1, spec.y2, a) == pytest.approx(0.0, abs=1e-12)


def test_empty_level_set():
    with pytest.raises(EmptyLevelSetError):
        build_sublevel_psi(SublevelSpec(power_cost(-2, 2), [0.0, 0.0], [1.0, 0.0], 1e6))


def test_quadratic_bisector_line():
    spec = SublevelSpec(power_cost(2, 2), [0.0, 0.0], [1.0, 0.0], 0.0)
    with pytest.warns(UnboundedLevelSetWarning):
        s = build_sublevel_psi(spec)
    curve = trace_level_curve_2d(s, find_seed_2d(s), step=0.05)
    assert not curve.closed
    np.testing.assert_allclose(curve.points[:, 0], 0.5, atol=1e-10)
    for x in curve.points[::10]:
        assert abs(tangential_hessian_min(s, x)) <= 1e-10


def test_unit_circle_trace():
    s = sphere([0.0, 0.0], 1.0)
    curve = trace_level_curve_2d(s, [1.05, 0.0], step=0.05)
    assert curve.closed
    assert np.abs(np.linalg.norm(curve.points, axis=1) - 1).max() <= 1e-8
    v = polyline_convexity(curve)
    assert v.convex and v.orientation == 1
    assert all(tangential_hessian_min(s, x) == pytest.approx(2.0, abs=1e-12) for x in curve.points[::7])


@pytest.mark.parametrize("k", sorted(FIGURE2_SETS))
def test_figure2_curve_closed_convex(figure2_traces, k):
    surface, curve = figure2_traces[k]
    assert curve.closed
    assert polyline_convexity(curve).convex
    assert max(abs(float(surface.psi(x))) for x in curve.points) <= 1e-8
    lo, hi = np.array([-2.0, -2.0]), np.array([2.0, 2.0])
    assert np.all(curve.points >= lo) and np.all(curve.points <= hi)


@pytest.mark.parametrize("k", sorted(FIGURE2_SETS))
def test_figure2_tangential_hessian_nonnegative(figure2_traces, k):
    surface, curve = figure2_traces[k]
    idx = np.linspace(0, len(curve.points) - 1, 200).astype(int)
    assert min(tangential_hessian_min(surface, curve.points[i]) for i in idx) >= -1e-9


@pytest.mark.parametrize("k", sorted(FIGURE2_SETS))
def test_tangential_hessian_matches_direction_sweep(figure2_traces, k):
    surface, curve = figure2_traces[k]
    th = 2 * np.pi * np.arange(360) / 360
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    for x in curve.points[:: max(1, len(curve.points) // 20)]:
        g = surface.grad(x)
        n = g / np.linalg.norm(g)
        H = surface.hess(x)
        vals = []
        for v in dirs:
            t = v - (v @ n) * n
            if np.linalg.norm(t) < 0.5:
                continue
            t /= np.linalg.norm(t)
            vals.append(t @ H @ t)
        assert tangential_hessian_min(surface, x) == pytest.approx(min(vals), abs=1e-8)


def test_closed_form_matches_fd_oracle(figure2_traces):
    worst = 0.0
    for k, x, tau in on_set_samples(figure2_traces):
        spec = FIGURE2_SETS[k]
        y1, y2, a = np.array(spec["y1"]), np.array(spec["y2"]), spec["a"]
        cf = closed_form_tangential_hessian_invquad(y1, y2, a, x, tau)
        h = 1e-3 * min(np.linalg.norm(x - y1), np.linalg.norm(x - y2))
        fd = fd_directional_second(lambda z: invquad_psi(z, y1, y2, a), x, tau, h)
        worst = max(worst, abs(cf - fd) / abs(fd))
    assert worst <= 1e-6


def test_sign_rule_and_swap(figure2_traces):
    for k, x, tau in on_set_samples(figure2_traces, seed=1):
        spec = FIGURE2_SETS[k]
        y1, y2, a = np.array(spec["y1"]), np.array(spec["y2"]), spec["a"]
        val = closed_form_tangential_hessian_invquad(y1, y2, a, x, tau)
        if a >= 0:
            assert val <= 1e-9
        else:
            assert val >= -1e-9
            # relabeled foci carry a non-negative offset and the negated field
            s1, s2, b = swap_foci(y1, y2, a)
            swapped = closed_form_tangential_hessian_invquad(s1, s2, b, x, tau)
            assert swapped <= 1e-9
            assert swapped == pytest.approx(-val, rel=1e-9, abs=1e-9)


def test_sign_rule_random_configurations():
    rng = np.random.default_rng(5)
    for _ in range(200):
        y1, y2, x = rng.uniform(-2, 2, (3, 2))
        if min(np.linalg.norm(x - y1), np.linalg.norm(x - y2)) < 0.2:
            continue
        a = 1 / np.sum((x - y2) ** 2) - 1 / np.sum((x - y1) ** 2)
        g = -2 * (x - y2) / np.sum((x - y2) ** 2) ** 2 + 2 * (x - y1) / np.sum((x - y1) ** 2) ** 2
        tau = np.array([-g[1], g[0]]) / np.linalg.norm(g)
        val = closed_form_tangential_hessian_invquad(y1, y2, a, x, tau)
        assert (val <= 1e-9) if a >= 0 else (val >= -1e-9)


def test_closed_form_preconditions():
    y1, y2 = np.array([0.0, 0.0]), np.array([2.0, 0.0])
    x = np.array([1.0, 0.0])  # a = 0 puts x on the bisector
    with pytest.raises(OffSurfaceError):
        closed_form_tangential_hessian_invquad(y1, y2, 0.5, x, [0.0, 1.0])
    with pytest.raises(NonTangentError):
        closed_form_tangential_hessian_invquad(y1, y2, 0.0, x, [1.0, 0.0])


def test_swap_foci_negates_field():
    y1, y2, a = np.array([0.1, 0.0]), np.array([1.0, 0.3]), -0.7
    s1, s2, b = swap_foci(y1, y2, a)
    for x in np.random.default_rng(2).uniform(-2, 2, (20, 2)):
        assert invquad_psi(x, s1, s2, b) == pytest.approx(-invquad_psi(x, y1, y2, a), rel=1e-12)


def test_swapped_spec_traces_same_curve():
    spec = figure2_spec(3)
    s1, s2, b = swap_foci(spec.y1, spec.y2, spec.a)
    _, c1 = trace_sublevel(spec)
    _, c2 = trace_sublevel(SublevelSpec(spec.model, s1, s2, b))
    # every vertex of one lies on the other's level set
    assert max(abs(invquad_psi(x, spec.y1, spec.y2, spec.a)) for x in c2.points) <= 1e-8
    assert len(c1.points) == pytest.approx(len(c2.points), rel=0.05)


def test_c_image_quadratic_is_point_reflection():
    th = 2 * np.pi * np.arange(40) / 40
    pts = np.column_stack([1.5 + np.cos(th), 0.5 * np.sin(th)])
    y0 = np.array([0.2, -0.4])
    v = c_image_convexity(power_cost(2, 2), Polyline2D(pts), y0)
    assert v.convex and v.agree
    image = np.array([power_cost(2, 2).c_y(x, y0) for x in pts])
    np.testing.assert_allclose(image, y0 - pts, atol=1e-15)


def test_c_image_mu_agreement_inverse_quadratic():
    rng = np.random.default_rng(17)
    th = 2 * np.pi * np.arange(120) / 120
    for _ in range(20):
        c = rng.uniform(-1, 1, 2)
        r = rng.uniform(0.2, 0.8)
        pts = c + r * np.column_stack([np.cos(th), np.sin(th)])
        u = rng.standard_normal(2)
        y0 = c + (r + rng.uniform(1.0, 3.0)) * u / np.linalg.norm(u)
        v = c_image_convexity(power_cost(-2, 2), Polyline2D(pts), y0)
        assert v.agree
        assert v.image.convex == v.mu_image.convex


def test_c_image_nonconvex_propagates():
    dart = np.array([[0, 0], [2, 0], [1, 0.2], [1, 1]], float)
    v = c_image_convexity(power_cost(2, 2), Polyline2D(dart), [5.0, 5.0])
    assert not v.convex and v.agree


def test_tracer_points_on_curve_general_cost():
    spec = SublevelSpec(power_cost(-1, 2), [0.0, 0.0], [1.0, 0.0], -0.6)
    with warnings.catch_warnings():
        warnings.simplefilter("error", UnboundedLevelSetWarning)
        s, curve = trace_sublevel(spec)
    assert curve.closed
    assert max(abs(float(s.psi(x))) for x in curve.points) <= 1e-8
