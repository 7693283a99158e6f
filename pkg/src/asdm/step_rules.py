"""Backtracking step selection under Rule 1 and Rule 2.

Trial steps are ``eta**i`` for ``i = 1, 2, ...`` with
``eta = (1 - beta)**(1/(v-1))``; the first trial is never the unit step.
``f(x)`` is always supplied by the caller, so each trial costs exactly one
function evaluation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BacktrackExhausted
from .objectives import CountingObjective, Point

DEFAULT_I_CAP = 60


class Rule(enum.IntEnum):
    RULE1 = 1
    RULE2 = 2


def eta(beta: float, v: float) -> float:
    """Backtracking ratio (1 - beta)^(1/(v-1))."""
    return (1.0 - beta) ** (1.0 / (v - 1.0))


@dataclass(frozen=True)
class StepSearchResult:
    i_star: int
    lam: float
    x_next: Point
    f_next: float
    trial_count: int
    rule_used: Rule


def _trial_value(obj, x: Point, s: Point, lam: float):
    x_new = x + lam * s
    if isinstance(obj, CountingObjective):
        return x_new, obj.value(x_new, check=False)
    with np.errstate(over="ignore", invalid="ignore"):
        return x_new, float(obj.value_fn(x_new))


def _accepts(rule: Rule, fx: float, f_new: float, lam: float, beta: float, gs: float, eps: float, snorm_v: float) -> bool:
    if not np.isfinite(f_new):
        return False
    if rule == Rule.RULE1:
        return fx - f_new >= -lam * beta * gs
    return fx - f_new >= lam * beta * eps * snorm_v


def rule1_holds(obj, x: Point, g: Point, s: Point, lam: float, beta: float, *, fx: float) -> bool:
    """f(x) - f(x + lam s) >= -lam beta <g, s>."""
    if not (0.0 < beta < 1.0) or lam <= 0:
        raise ValueError("need 0 < beta < 1 and lam > 0")
    _, f_new = _trial_value(obj, x, s, lam)
    return _accepts(Rule.RULE1, fx, f_new, lam, beta, float(g @ s), 0.0, 0.0)


def rule2_holds(obj, x: Point, s: Point, lam: float, beta: float, eps: float, v: float, *, fx: float) -> bool:
    """f(x) - f(x + lam s) >= lam beta eps ||s||^v."""
    if not (0.0 < beta < 1.0) or lam <= 0 or eps <= 0 or v < 2:
        raise ValueError("need 0 < beta < 1, lam > 0, eps > 0, v >= 2")
    _, f_new = _trial_value(obj, x, s, lam)
    return _accepts(Rule.RULE2, fx, f_new, lam, beta, 0.0, eps, float(np.linalg.norm(s)) ** v)


def backtrack(
    obj,
    x: Point,
    g: Point,
    s: Point,
    beta: float,
    eps: float,
    v: float,
    rule: Rule = Rule.RULE1,
    i_cap: int = DEFAULT_I_CAP,
    *,
    fx: float,
) -> StepSearchResult:
    """Smallest i in 1..i_cap whose step eta**i passes ``rule``.

    Raises:
        BacktrackExhausted: no index up to ``i_cap`` passes. Under Condition A
            this means ``i_cap`` is below the finite bound on the index.
    """
    if i_cap < 1:
        raise ValueError("i_cap must be >= 1")
    rule = Rule(rule)
    ratio = eta(beta, v)
    gs = float(g @ s)
    snorm_v = float(np.linalg.norm(s)) ** v
    best_lam, best_f = float("nan"), float("inf")
    for i in range(1, i_cap + 1):
        lam = ratio**i
        x_new, f_new = _trial_value(obj, x, s, lam)
        if _accepts(rule, fx, f_new, lam, beta, gs, eps, snorm_v):
            return StepSearchResult(i, lam, x_new, f_new, i, rule)
        if f_new < best_f:
            best_lam, best_f = lam, f_new
    raise BacktrackExhausted(
        f"no step among eta^1..eta^{i_cap} satisfied rule {int(rule)}", best_lam, best_f, i_cap
    )


def step_lower_bound(eps: float, mu: float, beta: float, v: float) -> float:
    """(eps (1-beta)^2 / mu)^(1/(v-1)); accepted steps exceed this when eps < mu."""
    if not (0.0 < eps < mu):
        raise ValueError(f"step lower bound needs 0 < eps < mu (eps={eps}, mu={mu})")
    if not (0.0 < beta < 1.0) or v < 2:
        raise ValueError("need 0 < beta < 1 and v >= 2")
    return (eps * (1.0 - beta) ** 2 / mu) ** (1.0 / (v - 1.0))


def mu_lower_estimate(eps: float, beta: float, lam: float, v: float) -> float:
    """eps (1-beta)^2 lam^(1-v): a lower estimate of the Condition-A constant."""
    if lam <= 0 or not (0.0 < beta < 1.0):
        raise ValueError("need lam > 0 and 0 < beta < 1")
    return eps * (1.0 - beta) ** 2 * lam ** (1.0 - v)
