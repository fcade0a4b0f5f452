"""Independent numerical oracles used by the tests.

Nothing here imports the package; each oracle re-derives its quantity from
the raw definition (finite differences, curve tracing, direct formulas).
"""

import numpy as np


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(F, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_hessian_of_gradient(grad, x, h=1e-5):
    """Richardson-extrapolated central differences of an analytic gradient."""
    J1 = fd_jacobian(grad, x, h)
    J2 = fd_jacobian(grad, x, 2 * h)
    J = (4 * J1 - J2) / 3
    return 0.5 * (J + J.T)


def project(psi, grad, x, iters=60):
    x = np.asarray(x, dtype=float)
    for _ in range(iters):
        g = grad(x)
        v = psi(x)
        x = x - v * g / (g @ g)
        if abs(v) < 1e-15:
            break
    return x


def curve_second_fundamental_form(psi, grad, x, v, h=1e-3):
    """-gamma''(0) . n for a curve on {psi = 0} through x with velocity v.

    The curve is the gradient-flow projection of the chord x + s v; second
    differences at h and 2h are Richardson-combined.
    """
    g0 = project(psi, grad, x)
    n = grad(g0) / np.linalg.norm(grad(g0))

    def second_difference(step):
        gp = project(psi, grad, x + step * v)
        gm = project(psi, grad, x - step * v)
        return -float((gp - 2 * g0 + gm) @ n) / step**2

    return (4 * second_difference(h) - second_difference(2 * h)) / 3


def circumcircle_curvature(p, q, r):
    a = np.linalg.norm(q - r)
    b = np.linalg.norm(p - r)
    c = np.linalg.norm(p - q)
    cross = (q - p)[0] * (r - p)[1] - (q - p)[1] * (r - p)[0]
    return 2 * abs(cross) / (a * b * c)


def power_cost_value(p, x, y):
    return np.linalg.norm(np.asarray(x) - np.asarray(y)) ** p / p
