import numpy as np
import pytest
from hypothesis import given, strategies as st

from blaschke_ot.cost_models import (
    PowerCost,
    c_star_segment,
    derivatives,
    mixed_hessian_det,
    mu_matrix,
    power_cost,
    solve_y_from_p,
)
from blaschke_ot.errors import (
    NoConvergenceError,
    SegmentThroughZeroError,
    SingularMatrixError,
    SingularPointError,
    ZeroMomentumError,
)
from oracles import fd_gradient, fd_jacobian, power_cost_value

EXPONENTS = [-2.0, -1.0, 0.5, 2.0]


def separated_pairs(rng, n, d=2, lo=0.5, hi=2.0):
    out = []
    for _ in range(n):
        x = rng.uniform(-2, 2, d)
        u = rng.standard_normal(d)
        out.append((x, x - u / np.linalg.norm(u) * rng.uniform(lo, hi)))
    return out


@pytest.mark.parametrize(
    "p, x, y, expected",
    [(2, (0, 0), (1, 0), 0.5), (-2, (0, 0), (1, 0), -0.5), (-1, (0, 0), (2, 0), -0.5)],
)
def test_power_cost_values(p, x, y, expected):
    assert power_cost(p, 2).c(np.array(x, float), np.array(y, float)) == pytest.approx(expected, abs=1e-15)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        power_cost(0, 2)
    with pytest.raises(ValueError):
        power_cost(2, 1)


def test_quadratic_derivatives():
    b = derivatives(power_cost(2, 2), [0.0, 0.0], [1.0, 0.0])
    np.testing.assert_allclose(b.c_x, [-1, 0])
    np.testing.assert_allclose(b.c_xx, np.eye(2))
    np.testing.assert_allclose(b.c_xy, -np.eye(2))
    np.testing.assert_allclose(b.c_yxx, 0, atol=1e-14)


def test_singular_point():
    with pytest.raises(SingularPointError):
        derivatives(power_cost(-2, 2), [0.0, 0.0], [1e-9, 0.0])


def test_inverse_quadratic_gradient_matches_fd():
    x, y = np.zeros(2), np.array([1.0, 0.0])
    fd = fd_gradient(lambda z: power_cost_value(-2, z, y), x)
    an = power_cost(-2, 2).c_x(x, y)
    np.testing.assert_allclose(an, fd, rtol=1e-6)


@pytest.mark.parametrize("p", EXPONENTS)
def test_all_analytic_entries_match_fd(p, rng):
    m = power_cost(p, 2)
    for x, y in separated_pairs(rng, 100):
        b = derivatives(m, x, y)
        scale = 1 + np.abs(b.c_xx).max()
        np.testing.assert_allclose(b.c_x, fd_gradient(lambda z: power_cost_value(p, z, y), x), rtol=1e-5, atol=1e-5 * scale)
        np.testing.assert_allclose(b.c_y, fd_gradient(lambda z: power_cost_value(p, x, z), y), rtol=1e-5, atol=1e-5 * scale)
        np.testing.assert_allclose(b.c_xx, fd_jacobian(lambda z: m.c_x(z, y), x), rtol=1e-5, atol=1e-5 * scale)
        np.testing.assert_allclose(b.c_xy, fd_jacobian(lambda z: m.c_x(x, z), y), rtol=1e-5, atol=1e-5 * scale)


@pytest.mark.parametrize("p", EXPONENTS + [3.0, 0.3])
def test_analytic_third_derivative_matches_fd_path(p, rng):
    m = power_cost(p, 3)
    for x, y in separated_pairs(rng, 20, d=3):
        fd = super(PowerCost, m).c_yxx(x, y)
        an = m.c_yxx_analytic(x, y)
        np.testing.assert_allclose(an, fd, rtol=1e-5, atol=1e-6 * (1 + np.abs(an).max()))


def test_c_xy_pairs_x_then_y(rng):
    m = power_cost(-1, 3)
    x, y = separated_pairs(rng, 1, d=3)[0]
    # (c_xy)_{ij} = d/dy_j c_{x_i}
    np.testing.assert_allclose(m.c_xy(x, y), fd_jacobian(lambda z: m.c_x(x, z), y), rtol=1e-6)


@pytest.mark.parametrize("p", EXPONENTS)
def test_symmetry(p, rng):
    m = power_cost(p, 2)
    for x, y in separated_pairs(rng, 20):
        assert m.c(x, y) == pytest.approx(m.c(y, x), rel=1e-14)
        np.testing.assert_allclose(m.c_xx(x, y), m.c_yy(y, x), rtol=1e-13)


def test_solve_quadratic():
    y = solve_y_from_p(power_cost(2, 2), [0.0, 0.0], [1.0, 0.0])
    np.testing.assert_allclose(y, [-1.0, 0.0], atol=1e-15)


def test_solve_inverse_quadratic_residual():
    m = power_cost(-2, 2)
    y = solve_y_from_p(m, [0.0, 0.0], [1.0, 0.0])
    assert np.linalg.norm(m.c_x(np.zeros(2), y) - [1.0, 0.0]) <= 1e-10 * 2


@pytest.mark.parametrize("p", EXPONENTS)
def test_round_trip_100_samples(p):
    m = power_cost(p, 2)
    rng = np.random.default_rng(123)
    for x, y in separated_pairs(rng, 100):
        np.testing.assert_allclose(solve_y_from_p(m, x, m.c_x(x, y)), y, atol=1e-8)


@given(
    p=st.sampled_from(EXPONENTS + [-1.5, 0.7, 3.0]),
    seed=st.integers(0, 2**32 - 1),
)
def test_round_trip_property(p, seed):
    m = power_cost(p, 3)
    x, y = separated_pairs(np.random.default_rng(seed), 1, d=3)[0]
    np.testing.assert_allclose(solve_y_from_p(m, x, m.c_x(x, y)), y, atol=1e-8)


def test_newton_recovers_from_perturbed_guess():
    class Shifted(PowerCost):
        def inverse_guess(self, x, p_vec):
            return super().inverse_guess(x, p_vec) + 0.05

    m = Shifted(p=-1.0, dim=2)
    x = np.array([0.3, -0.2])
    y = solve_y_from_p(m, x, [0.7, 0.4])
    assert np.linalg.norm(m.c_x(x, y) - [0.7, 0.4]) <= 1e-10 * 2


def test_zero_momentum():
    with pytest.raises(ZeroMomentumError):
        solve_y_from_p(power_cost(-2, 2), [0.0, 0.0], [0.0, 0.0])


def test_p_one_has_no_inversion():
    with pytest.raises(NoConvergenceError):
        solve_y_from_p(power_cost(1, 2), [0.0, 0.0], [1.0, 0.0])


def test_mixed_hessian_det_quadratic():
    assert mixed_hessian_det(power_cost(2, 2), [0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)
    assert mixed_hessian_det(power_cost(2, 3), [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == pytest.approx(-1.0)


def test_mixed_hessian_det_inverse_quadratic_fd():
    m = power_cost(-2, 2)
    x, y = np.zeros(2), np.array([1.0, 0.0])
    fd = np.linalg.det(fd_jacobian(lambda z: m.c_x(x, z), y))
    assert mixed_hessian_det(m, x, y) == pytest.approx(fd, rel=1e-5)


def test_mixed_hessian_singular_for_p_one():
    with pytest.raises(SingularMatrixError):
        mixed_hessian_det(power_cost(1, 2), [0.0, 0.0], [1.0, 0.0])


@pytest.mark.parametrize("p", EXPONENTS)
def test_mu_inverts_mixed_hessian(p, rng):
    m = power_cost(p, 2)
    for x, y in separated_pairs(rng, 10):
        mu = mu_matrix(m, x, y)
        np.testing.assert_allclose(mu @ m.c_xy(x, y).T, np.eye(2), atol=1e-10)


def test_c_star_segment_endpoints_and_quadratic_line():
    m = power_cost(-2, 2)
    x0, p0, p1 = np.array([0.1, 0.2]), np.array([1.0, 0.5]), np.array([0.3, 2.0])
    np.testing.assert_allclose(c_star_segment(m, x0, p0, p1, 0.0), solve_y_from_p(m, x0, p0))
    np.testing.assert_allclose(c_star_segment(m, x0, p0, p1, 1.0), solve_y_from_p(m, x0, p1))
    q = power_cost(2, 2)
    for t in np.linspace(0, 1, 7):
        np.testing.assert_allclose(c_star_segment(q, x0, p0, p1, t), x0 - ((1 - t) * p0 + t * p1), atol=1e-14)


def test_c_star_segment_through_zero():
    with pytest.raises(SegmentThroughZeroError):
        c_star_segment(power_cost(-2, 2), [0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], 0.3)
