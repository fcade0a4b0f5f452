"""Ma-Trudinger-Wang tensor evaluation and sampled classification.

The tensor ``A_{ij,kl} xi_i xi_j eta_k eta_l`` is the second derivative in
momentum along ``eta`` of ``q(p) = xi^T A(x, p) xi`` where
``A(x, p) = c_xx(x, y(x, p))``.  It is evaluated by central differences of
the analytic ``c_xx`` composed with the momentum inversion, so no symbolic
fourth derivatives are needed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .cost_models import CostModel, c_star_segment, solve_y_from_p
from .errors import AuditError, GeometryError, StepTooSmallError

A3_POSITIVE = "A3-positive"
WEAK_A3 = "weak-A3"
VIOLATED = "violated"

POS_TOL = 1e-5
SEGMENT_STEP = 1e-3


@dataclass(frozen=True)
class MtwSample:
    x: np.ndarray
    p_vec: np.ndarray
    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("x", "p_vec", "xi", "eta"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if abs(np.linalg.norm(self.xi) - 1) > 1e-12 or abs(np.linalg.norm(self.eta) - 1) > 1e-12:
            raise ValueError("xi and eta must be unit vectors")
        if abs(float(self.xi @ self.eta)) > 1e-12:
            raise ValueError("xi and eta must be orthogonal")

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in asdict(self).items()}


@dataclass(frozen=True)
class SamplerConfig:
    """Domain box ``[-box, box]^d`` for ``x`` and momentum band ``|p| in [p_min, p_max]``."""

    box: float = 2.0
    p_min: float = 0.2
    p_max: float = 5.0


@dataclass
class MtwAuditReport:
    classification: str
    min_value: float
    c0_estimate: float
    witness: MtwSample
    samples: int
    seed: int
    pos_tol: float
    failures: int = 0
    values: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "min_value": self.min_value,
            "c0_estimate": self.c0_estimate,
            "witness": self.witness.to_dict(),
            "samples": self.samples,
            "seed": self.seed,
            "pos_tol": self.pos_tol,
            "failures": self.failures,
        }


def classify(min_value: float, pos_tol: float = POS_TOL) -> str:
    if min_value > pos_tol:
        return A3_POSITIVE
    if min_value < -pos_tol:
        return VIOLATED
    return WEAK_A3


def a_matrix(model: CostModel, x, p_vec) -> np.ndarray:
    """``A(x, p) = c_xx(x, y(x, p))``."""
    y = solve_y_from_p(model, x, p_vec)
    A = model.c_xx(x, y)
    return 0.5 * (A + A.T)


def _q(model, x, p, xi) -> float:
    return float(xi @ a_matrix(model, x, p) @ xi)


def _second_difference(model, x, p, xi, eta, h) -> float:
    return (_q(model, x, p + h * eta, xi) - 2 * _q(model, x, p, xi) + _q(model, x, p - h * eta, xi)) / h**2


def mtw_contraction(model: CostModel, sample: MtwSample, h: float | None = None) -> float:
    """``A_{ij,kl} xi_i xi_j eta_k eta_l`` at ``(sample.x, sample.p_vec)``.

    Central second differences at steps ``h`` and ``2h`` are combined by one
    Richardson level.  If the two raw differences disagree by more than 10%
    (beyond a rounding floor) the step is halved once; persistent
    disagreement raises :class:`StepTooSmallError`.
    """
    x, p, xi, eta = sample.x, sample.p_vec, sample.xi, sample.eta
    if h is None:
        h = 1e-3 * (1.0 + float(np.linalg.norm(p)))
    q0 = abs(_q(model, x, p, xi))
    for _ in range(2):
        d1 = _second_difference(model, x, p, xi, eta, h)
        d2 = _second_difference(model, x, p, xi, eta, 2 * h)
        rich = (4 * d1 - d2) / 3
        floor = 1e-6 * (1.0 + q0)
        if abs(d1 - d2) <= 0.1 * abs(rich) + floor:
            return rich
        h *= 0.5
    raise StepTooSmallError(f"second difference unstable: D(h)={d1:.6e}, D(2h)={d2:.6e}")


def segment_second_derivative(model: CostModel, x, p0, p1, xi, t: float, dt: float = SEGMENT_STEP) -> float:
    """``d^2/dt^2 xi^T c_xx(x, y(x, p_t)) xi`` along the c*-segment."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if t - dt < 0 or t + dt > 1:
        # shift the stencil inside [0, 1]; the momentum path is affine in t
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        pt = (1 - t) * p0 + t * p1
        d = p1 - p0
        ys = [solve_y_from_p(model, x, pt + s * dt * d) for s in (-1, 0, 1)]
    else:
        ys = [c_star_segment(model, x, p0, p1, t + s * dt) for s in (-1, 0, 1)]
    qs = [float(xi @ model.c_xx(x, y) @ xi) for y in ys]
    return (qs[0] - 2 * qs[1] + qs[2]) / dt**2


def random_orthonormal_pair(rng: np.random.Generator, d: int):
    """Gram-Schmidt on two Gaussian vectors."""
    a = rng.standard_normal(d)
    b = rng.standard_normal(d)
    xi = a / np.linalg.norm(a)
    b = b - (b @ xi) * xi
    eta = b / np.linalg.norm(b)
    eta = eta - (eta @ xi) * xi
    return xi, eta / np.linalg.norm(eta)


def draw_samples(dim: int, n: int, seed: int, sampler: SamplerConfig = SamplerConfig()):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = rng.uniform(-sampler.box, sampler.box, dim)
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        p = direction * rng.uniform(sampler.p_min, sampler.p_max)
        xi, eta = random_orthonormal_pair(rng, dim)
        out.append(MtwSample(x, p, xi, eta))
    return out


def audit_grid(
    model: CostModel,
    sampler: SamplerConfig = SamplerConfig(),
    n: int = 1000,
    seed: int = 0,
    pos_tol: float = POS_TOL,
) -> MtwAuditReport:
    """Evaluate the MTW contraction on ``n`` seeded samples and classify.

    Ties for the minimum go to the lowest sample index.
    """
    samples = draw_samples(model.dim, n, seed, sampler)
    values = np.full(n, np.nan)
    for i, s in enumerate(samples):
        try:
            values[i] = mtw_contraction(model, s)
        except GeometryError:
            pass
    failures = int(np.isnan(values).sum())
    if failures > 0.01 * n:
        raise AuditError(f"{failures}/{n} samples failed")
    k = int(np.nanargmin(values))
    m = float(values[k])
    return MtwAuditReport(
        classification=classify(m, pos_tol),
        min_value=m,
        c0_estimate=m,
        witness=samples[k],
        samples=n,
        seed=seed,
        pos_tol=pos_tol,
        failures=failures,
        values=values,
    )
