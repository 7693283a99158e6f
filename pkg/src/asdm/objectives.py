"""Objective contract, evaluation counting and empirical certifiers.

Points are one-dimensional ``float64`` numpy arrays. Every certifier uses
``tau(x, y) = ||x - y||**v`` as the Condition-A kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ObjectiveDomainError

Point = np.ndarray


def as_point(x, dimension: Optional[int] = None) -> Point:
    """Convert ``x`` to a finite float64 vector, checking its dimension."""
    p = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if p.ndim != 1:
        raise ValueError(f"point must be a vector, got shape {p.shape}")
    if dimension is not None and p.shape[0] != dimension:
        raise ValueError(f"point has {p.shape[0]} entries, objective expects {dimension}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


@dataclass(frozen=True)
class ObjectiveMetadata:
    """Analytic facts about an objective, all optional.

    ``mu``/``v_exponent`` form a Condition-A certificate. When only
    ``lipschitz_L`` is given, ``mu = L/2`` with ``v = 2`` is used.
    """

    lipschitz_L: Optional[float] = None
    mu: Optional[float] = None
    v_exponent: float = 2.0
    f_star: Optional[float] = None
    minimizers: tuple = ()

    def __post_init__(self):
        if self.lipschitz_L is not None and self.mu is None:
            object.__setattr__(self, "mu", self.lipschitz_L / 2.0)
        object.__setattr__(
            self, "minimizers", tuple(np.asarray(m, dtype=np.float64) for m in self.minimizers)
        )


@dataclass(frozen=True)
class ObjectiveSpec:
    dimension: int
    value_fn: Callable[[Point], float]
    gradient_fn: Callable[[Point], Point]
    metadata: ObjectiveMetadata = field(default_factory=ObjectiveMetadata)
    name: str = "objective"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    def value(self, x: Point) -> float:
        return evaluate(self, x)

    def gradient(self, x: Point) -> Point:
        return gradient(self, x)


class CountingObjective:
    """Per-run wrapper that counts function and gradient evaluations.

    Counters live on the wrapper so concurrent runs never share state.
    """

    def __init__(self, spec: ObjectiveSpec):
        self.spec = spec
        self.fevals = 0
        self.gevals = 0

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def metadata(self) -> ObjectiveMetadata:
        return self.spec.metadata

    def value(self, x: Point, check: bool = True) -> float:
        """Return f(x). With ``check=False`` a non-finite value is returned, not raised."""
        self.fevals += 1
        with np.errstate(over="ignore", invalid="ignore"):
            fx = float(self.spec.value_fn(x))
        if check and not np.isfinite(fx):
            raise ObjectiveDomainError(f"non-finite objective value {fx}", x)
        return fx

    def gradient(self, x: Point) -> Point:
        self.gevals += 1
        with np.errstate(over="ignore", invalid="ignore"):
            g = np.asarray(self.spec.gradient_fn(x), dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(g)):
            raise ObjectiveDomainError("non-finite gradient component", x)
        return g


def _spec_of(obj) -> ObjectiveSpec:
    return obj.spec if isinstance(obj, CountingObjective) else obj


def evaluate(obj, x) -> float:
    """f(x); counted when ``obj`` is a :class:`CountingObjective`."""
    if isinstance(obj, CountingObjective):
        return obj.value(as_point(x, obj.dimension))
    x = as_point(x, obj.dimension)
    with np.errstate(over="ignore", invalid="ignore"):
        fx = float(obj.value_fn(x))
    if not np.isfinite(fx):
        raise ObjectiveDomainError(f"non-finite objective value {fx}", x)
    return fx


def gradient(obj, x) -> Point:
    """The gradient of ``obj`` at ``x``, counted separately from values."""
    if isinstance(obj, CountingObjective):
        return obj.gradient(as_point(x, obj.dimension))
    x = as_point(x, obj.dimension)
    with np.errstate(over="ignore", invalid="ignore"):
        g = np.asarray(obj.gradient_fn(x), dtype=np.float64).reshape(-1)
    if g.shape[0] != obj.dimension:
        raise ValueError(f"gradient has {g.shape[0]} entries, expected {obj.dimension}")
    if not np.all(np.isfinite(g)):
        raise ObjectiveDomainError("non-finite gradient component", x)
    return g


def check_gradient(obj, x, h: float = 1e-5) -> float:
    """Max coordinate error of the analytic gradient vs central differences.

    The error of coordinate ``i`` is ``|g_i - d_i| / max(|d_i|, 1)`` where
    ``d_i`` is the central difference with stencil width ``h``; relative for
    large derivatives and absolute below one.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    spec = _spec_of(obj)
    x = as_point(x, spec.dimension)
    g = gradient(spec, x)
    worst = 0.0
    for i in range(spec.dimension):
        e = np.zeros_like(x)
        e[i] = h
        d = (evaluate(spec, x + e) - evaluate(spec, x - e)) / (2.0 * h)
        worst = max(worst, abs(g[i] - d) / max(abs(d), 1.0))
    return worst


@dataclass(frozen=True)
class SegmentSample:
    x: Point
    y: Point
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def condition_a_residual(obj, s: SegmentSample, mu: float, v: float) -> float:
    """f(a x + (1-a) y) - [a f(x) + (1-a) f(y) - a (1-a) mu ||x - y||^v].

    Non-negative values certify the sample; negative ones are counterexamples.
    """
    if mu <= 0 or v < 2:
        raise ValueError("need mu > 0 and v >= 2")
    spec = _spec_of(obj)
    x, y, a = as_point(s.x), as_point(s.y), float(s.alpha)
    z = a * x + (1.0 - a) * y
    tau = float(np.linalg.norm(x - y)) ** v
    lower = a * evaluate(spec, x) + (1.0 - a) * evaluate(spec, y) - a * (1.0 - a) * mu * tau
    return evaluate(spec, z) - lower


def differential_inequality_residual(obj, x, y, mu: float, v: float) -> float:
    """[f(x) - f(y)] - [<grad f(x), x - y> - mu ||x - y||^v]."""
    if mu <= 0 or v < 2:
        raise ValueError("need mu > 0 and v >= 2")
    spec = _spec_of(obj)
    x, y = as_point(x, spec.dimension), as_point(y, spec.dimension)
    d = x - y
    rhs = float(gradient(spec, x) @ d) - mu * float(np.linalg.norm(d)) ** v
    return evaluate(spec, x) - evaluate(spec, y) - rhs


def pseudoconvexity_witness(obj, x, y) -> bool:
    """True iff (x, y) violates pseudo-convexity: f(y) < f(x) yet <grad f(x), y - x> >= 0."""
    spec = _spec_of(obj)
    x, y = as_point(x, spec.dimension), as_point(y, spec.dimension)
    if not evaluate(spec, y) < evaluate(spec, x):
        return False
    return float(gradient(spec, x) @ (y - x)) >= 0.0


def sample_box(rng: np.random.Generator, center: Sequence[float], half_width: float, count: int) -> np.ndarray:
    """``count`` uniform points from the box ``center +- half_width``."""
    c = np.asarray(center, dtype=np.float64)
    return c + rng.uniform(-half_width, half_width, size=(count, c.shape[0]))


def pseudoconvexity_scan(obj, center, half_width: float, rng: np.random.Generator, count: int) -> int:
    """Count violating pairs among ``count`` sampled pairs in a box.

    A tenth of the pairs take the box center as ``x`` so that isolated
    critical points at the center (inflections) are probed.
    """
    spec = _spec_of(obj)
    c = as_point(center, spec.dimension)
    ys = sample_box(rng, c, half_width, count)
    xs = sample_box(rng, c, half_width, count)
    xs[: max(1, count // 10)] = c
    return sum(pseudoconvexity_witness(spec, x, y) for x, y in zip(xs, ys))
