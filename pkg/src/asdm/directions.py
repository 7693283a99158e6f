"""eps-normalized descent directions built from the antigradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OptimalityReached
from .objectives import Point


@dataclass(frozen=True)
class DirectionChoice:
    """Result of :func:`normalize`.

    Attributes:
        s: the eps-normalized direction.
        was_rescaled: False when the raw antigradient already qualified.
        p: the raw antigradient ``-g``.
        t: rescaling numerator ``||g||^2``.
    """

    s: Point
    was_rescaled: bool
    p: Point
    t: float


def normalization_gap(g: Point, s: Point, eps: float, v: float) -> float:
    """<g, s> + eps ||s||^v; non-positive for an eps-normalized direction."""
    return float(g @ s) + eps * float(np.linalg.norm(s)) ** v


def is_eps_normalized(g: Point, s: Point, eps: float, v: float) -> bool:
    if not np.any(s):
        raise ValueError("a descent direction must be non-zero")
    if eps <= 0 or v < 2:
        raise ValueError("need eps > 0 and v >= 2")
    return normalization_gap(g, s, eps, v) <= 0.0


def normalize(g: Point, eps: float, v: float) -> DirectionChoice:
    """Antigradient, shrunk to p / (eps ||p||^(v-2)) when it is not eps-normalized.

    Raises:
        OptimalityReached: ``g`` is the zero vector.
    """
    g = np.asarray(g, dtype=np.float64)
    if not np.any(g):
        raise OptimalityReached("zero gradient: the current point is optimal")
    p = -g
    t = float(g @ g)
    if is_eps_normalized(g, p, eps, v):
        return DirectionChoice(s=p, was_rescaled=False, p=p, t=t)
    if v == 2:
        s = p / eps
    else:
        s = p / (eps * float(np.linalg.norm(p)) ** (v - 2))
    return DirectionChoice(s=s, was_rescaled=True, p=p, t=t)
