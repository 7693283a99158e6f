"""Analytic test problems addressable by string id."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .objectives import ObjectiveMetadata, ObjectiveSpec, Point


@dataclass(frozen=True)
class Problem:
    """A suite member: objective, default start and sampling box.

    ``half_width`` defines the box around a start point that stands in for
    its Lebesgue set; it is used both for random starts and for certifiers.
    """

    problem_id: str
    objective: ObjectiveSpec
    start: Point
    half_width: float
    convex: bool
    pseudo_convex: bool = True

    @property
    def metadata(self) -> ObjectiveMetadata:
        return self.objective.metadata

    def random_start(self, rng: np.random.Generator) -> Point:
        return self.start + rng.uniform(-self.half_width, self.half_width, size=self.start.shape)


def quad1d() -> Problem:
    obj = ObjectiveSpec(
        dimension=1,
        value_fn=lambda x: 0.5 * float(x @ x),
        gradient_fn=lambda x: x.copy(),
        metadata=ObjectiveMetadata(lipschitz_L=1.0, f_star=0.0, minimizers=[[0.0]]),
        name="quad1d",
    )
    return Problem("quad1d", obj, np.array([1.0]), 4.0, convex=True)


def half_norm(dimension: int = 2) -> Problem:
    """0.5 ||x||^2 in ``dimension`` variables."""
    obj = ObjectiveSpec(
        dimension=dimension,
        value_fn=lambda x: 0.5 * float(x @ x),
        gradient_fn=lambda x: x.copy(),
        metadata=ObjectiveMetadata(lipschitz_L=1.0, f_star=0.0, minimizers=[np.zeros(dimension)]),
        name="halfnorm",
    )
    return Problem("halfnorm", obj, np.ones(dimension), 3.0, convex=True)


def steepquad() -> Problem:
    obj = ObjectiveSpec(
        dimension=1,
        value_fn=lambda x: 50.0 * float(x @ x),
        gradient_fn=lambda x: 100.0 * x,
        metadata=ObjectiveMetadata(lipschitz_L=100.0, f_star=0.0, minimizers=[[0.0]]),
        name="steepquad",
    )
    return Problem("steepquad", obj, np.array([1.0]), 2.0, convex=True)


def quadratic(
    spectrum: Sequence[float] = (1.0, 4.0, 10.0),
    b: Optional[Sequence[float]] = None,
    rotation_seed: int = 0,
) -> Problem:
    """0.5 x'Ax - b'x with A = Q diag(spectrum) Q' and a seeded rotation Q.

    Values are computed as ``f* + 0.5 d'Ad`` with ``d = x - x*``, which is the
    same function but keeps the gap to ``f*`` accurate near the minimizer.
    ``b`` defaults to zero. With ``f* != 0`` the attainable gradient norm is
    limited by the rounding of ``f*`` (about 1e-7 for ``|f*| ~ 1``).
    """
    lam = np.asarray(spectrum, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise ConfigurationError("spectrum must be a non-empty list of positive eigenvalues")
    n = lam.size
    q, _ = np.linalg.qr(np.random.default_rng(rotation_seed).standard_normal((n, n)))
    a = (q * lam) @ q.T
    a = 0.5 * (a + a.T)
    bv = np.zeros(n) if b is None else np.asarray(b, dtype=np.float64)
    if bv.shape != (n,):
        raise ConfigurationError(f"b must have {n} entries")
    x_star = np.linalg.solve(a, bv)
    f_star = -0.5 * float(bv @ x_star)

    def value(x):
        d = x - x_star
        return f_star + 0.5 * float(d @ (a @ d))

    obj = ObjectiveSpec(
        dimension=n,
        value_fn=value,
        gradient_fn=lambda x: a @ (x - x_star),
        metadata=ObjectiveMetadata(lipschitz_L=float(lam.max()), f_star=f_star, minimizers=[x_star]),
        name="quad",
    )
    return Problem("quad", obj, np.ones(n), 3.0, convex=True)


def log_sum_exp(center: Sequence[float] = (1.0, -0.5)) -> Problem:
    """Smooth max of +-(x_i - c_i), shifted so that f* = 0.

    f(x) = log(sum_i (e^{y_i} + e^{-y_i}) / 2n), y = x - c. The Hessian is
    bounded by the identity, so L = 1.
    """
    c = np.asarray(center, dtype=np.float64)
    n = c.size

    def value(x):
        y = x - c
        # cosh(y) - 1 == 2 sinh(y/2)^2, exact near the minimizer
        return float(np.log1p(np.mean(2.0 * np.sinh(0.5 * y) ** 2)))

    def grad(x):
        y = x - c
        return np.sinh(y) / (n * np.mean(np.cosh(y)))

    obj = ObjectiveSpec(
        dimension=n,
        value_fn=value,
        gradient_fn=grad,
        metadata=ObjectiveMetadata(lipschitz_L=1.0, f_star=0.0, minimizers=[c]),
        name="lse",
    )
    return Problem("lse", obj, np.zeros(n), 3.0, convex=True)


def fractional_ball(center: Sequence[float] = (1.0, -1.0)) -> Problem:
    """r / (1 + r) with r = ||x - c||^2: pseudo-convex but not convex.

    Radial curvature ranges over [-1/2, 2], so the gradient is 2-Lipschitz.
    """
    c = np.asarray(center, dtype=np.float64)
    n = c.size

    def value(x):
        d = x - c
        r = float(d @ d)
        return r / (1.0 + r)

    def grad(x):
        d = x - c
        r = float(d @ d)
        return 2.0 * d / (1.0 + r) ** 2

    obj = ObjectiveSpec(
        dimension=n,
        value_fn=value,
        gradient_fn=grad,
        metadata=ObjectiveMetadata(lipschitz_L=2.0, f_star=0.0, minimizers=[c]),
        name="fractional-ball",
    )
    return Problem("fractional-ball", obj, c + np.array([-0.5, 0.5])[:n], 0.5, convex=False)


def cubic() -> Problem:
    """x^3 in one variable. Not pseudo-convex; certifier tests only."""
    obj = ObjectiveSpec(
        dimension=1,
        value_fn=lambda x: float(x[0] ** 3),
        gradient_fn=lambda x: np.array([3.0 * x[0] ** 2]),
        name="cubic",
    )
    return Problem("cubic", obj, np.array([0.0]), 1.0, convex=False, pseudo_convex=False)


REGISTRY: Dict[str, Callable[..., Problem]] = {
    "quad1d": quad1d,
    "halfnorm": half_norm,
    "steepquad": steepquad,
    "quad": quadratic,
    "lse": log_sum_exp,
    "fractional-ball": fractional_ball,
    "cubic": cubic,
}

# Problems the solver benchmark sweeps over (cubic is excluded: it is unbounded below).
SUITE = ("quad1d", "steepquad", "quad", "lse", "fractional-ball")


def get_problem(problem_id: str, **options) -> Problem:
    try:
        factory = REGISTRY[problem_id]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigurationError(f"unknown problem_id {problem_id!r} (known: {known})") from None
    try:
        return factory(**options)
    except TypeError as exc:
        raise ConfigurationError(f"bad options for problem {problem_id!r}: {exc}") from None
