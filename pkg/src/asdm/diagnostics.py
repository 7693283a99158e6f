"""Post-hoc audits of a finished trace.

Every audit scans the full trace; none of them samples. Audits that compare
consecutive records skip pairs that are not adjacent in ``k`` (thinned
traces).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .objectives import ObjectiveSpec, Point, as_point, evaluate, gradient, sample_box
from .solver import IterationRecord, Trace
from .step_rules import Rule, eta

DECREASE_RTOL = 1e-10
# resolution of a computed gap f_k - f*, in ulps of the larger operand
GAP_ULPS = 4.0


@dataclass
class AuditReport:
    monotone_ok: bool
    eps_bound_ok: Optional[bool] = None
    eps_bar: Optional[float] = None
    decrease_audit_ok: Optional[bool] = None
    c_bar: Optional[float] = None
    step_bound_ok: Optional[bool] = None
    rate_constant: Optional[float] = None
    rate_tail_ok: Optional[bool] = None
    theta_min: Optional[float] = None
    ctilde_ok: Optional[bool] = None
    c_tilde: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        flags = (
            self.monotone_ok,
            self.eps_bound_ok,
            self.decrease_audit_ok,
            self.step_bound_ok,
            self.rate_tail_ok,
        )
        return all(f is not False for f in flags)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _pairs(trace: Trace):
    recs = trace.records
    for a, b in zip(recs, recs[1:]):
        if b.k == a.k + 1 and not a.terminal:
            yield a, b


def audit_monotonicity(trace: Trace) -> bool:
    """True iff f strictly decreases across consecutive records."""
    return all(b.f < a.f for a, b in _pairs(trace))


def epsilon_bound(eps0: float, mu: float, beta: float) -> float:
    """max{eps0, mu / (1 - beta)}."""
    return max(eps0, mu / (1.0 - beta))


def audit_epsilon_bound(trace: Trace, mu: float) -> bool:
    p = trace.params
    bar = epsilon_bound(p.eps0, mu, p.beta)
    return all(r.eps <= bar for r in trace.records)


def decrease_constant_rule1(beta: float, v: float, eps0: float, mu: float) -> float:
    """min{beta (1-beta)^(1/(v-1)), beta ((1-beta)^2 eps0 / mu)^(1/(v-1))}."""
    c1 = beta * (1.0 - beta) ** (1.0 / (v - 1.0))
    c2 = ((1.0 - beta) ** 2 * eps0 / mu) ** (1.0 / (v - 1.0)) * beta
    return min(c1, c2)


def decrease_constant_rule2(beta: float, v: float, eps0: float, mu: float) -> float:
    c1 = beta * (1.0 - beta) ** (1.0 / (v - 1.0))
    ratio = eps0 / mu
    c2 = (ratio * (1.0 - beta) ** 2) ** (1.0 / (v - 1.0)) / (1.0 + ratio * (1.0 - beta) / beta)
    return min(c1, c2)


def decrease_constant(rule: Rule, beta: float, v: float, eps0: float, mu: float) -> float:
    if Rule(rule) == Rule.RULE1:
        return decrease_constant_rule1(beta, v, eps0, mu)
    return decrease_constant_rule2(beta, v, eps0, mu)


def decrease_violations(trace: Trace, c_bar: float, rtol: float = DECREASE_RTOL) -> List[int]:
    """Iterations k where f_k - f_{k+1} < -c_bar <g_k, s_k> beyond ``rtol``."""
    bad = []
    for a, b in _pairs(trace):
        lhs = a.f - b.f
        rhs = -c_bar * a.dir_dot_grad
        if lhs < rhs - rtol * max(abs(rhs), abs(a.f), abs(b.f)):
            bad.append(a.k)
    return bad


def audit_decrease(trace: Trace, obj: ObjectiveSpec, c_bar: float) -> bool:
    """f_k - f_{k+1} >= -c_bar <grad f(x_k), s_k> at every iteration.

    ``obj`` is unused: the trace already stores ``<g_k, s_k>``.
    """
    return not decrease_violations(trace, c_bar)


def step_bound_violations(trace: Trace, mu: float) -> List[int]:
    p = trace.params
    bad = []
    for r in trace.records:
        if r.terminal or not r.eps < mu:
            continue
        # gate: direction is not mu-normalized
        if r.dir_dot_grad + mu * r.step_norm**p.v <= 0:
            continue
        bound = (r.eps * (1.0 - p.beta) ** 2 / mu) ** (1.0 / (p.v - 1.0))
        if not r.lam > bound:
            bad.append(r.k)
    return bad


def audit_step_lower_bound(trace: Trace, mu: float) -> bool:
    """Accepted steps exceed (eps_k (1-beta)^2 / mu)^(1/(v-1)) wherever
    eps_k < mu and s_k is not mu-normalized."""
    return not step_bound_violations(trace, mu)


def fit_sublinear_constant(trace: Trace, f_star: float) -> float:
    """max over k >= 1 of k (f_k - f*).

    Raises:
        ValueError: some f_k lies below ``f_star`` by more than rounding.
    """
    best = 0.0
    for r in trace.records:
        gap = r.f - f_star
        if gap < -_gap_slack(r.f, f_star):
            raise ValueError(f"f_{r.k} = {r.f!r} is below f* = {f_star!r}; inconsistent f_star")
        if r.k >= 1:
            best = max(best, r.k * gap)
    return best


def _gap_slack(fk: float, f_star: float) -> float:
    return GAP_ULPS * np.finfo(float).eps * max(abs(fk), abs(f_star), np.finfo(float).tiny)


def rate_tail_nonincreasing(trace: Trace, f_star: float) -> bool:
    """k (f_k - f*) is non-increasing over the final half of the iterations.

    Each comparison allows the rounding resolution of the two computed gaps.
    """
    last = trace.records[-1].k
    tail = [r for r in trace.records if r.k >= max(1, last // 2)]
    for a, b in zip(tail, tail[1:]):
        ka, kb = a.k * (a.f - f_star), b.k * (b.f - f_star)
        slack = a.k * _gap_slack(a.f, f_star) + b.k * _gap_slack(b.f, f_star)
        if kb > ka + slack:
            return False
    return True


def theta_estimate(obj: ObjectiveSpec, x, x_star) -> float:
    """<grad f(x), x - x*> / (f(x) - f(x*)), the largest admissible theta at x."""
    x, x_star = as_point(x, obj.dimension), as_point(x_star, obj.dimension)
    fx, fs = evaluate(obj, x), evaluate(obj, x_star)
    if not fx > fs:
        raise ValueError("theta is undefined unless f(x) > f(x*)")
    return float(gradient(obj, x) @ (x - x_star)) / (fx - fs)


def nearest_minimizer(x: Point, minimizers) -> Point:
    return min(minimizers, key=lambda m: float(np.linalg.norm(x - m)))


def theta_min(trace: Trace, obj: ObjectiveSpec) -> Optional[float]:
    mins = obj.metadata.minimizers
    if not mins:
        return None
    vals = []
    for r in trace.records:
        m = nearest_minimizer(r.x, mins)
        if r.f > evaluate(obj, m):
            vals.append(theta_estimate(obj, r.x, m))
    return min(vals) if vals else None


def estimate_gradient_bound(obj: ObjectiveSpec, center, half_width: float, rng: np.random.Generator, count: int = 2000) -> float:
    """Largest sampled ||grad f|| over the box around ``center``."""
    pts = sample_box(rng, center, half_width, count)
    return max(float(np.linalg.norm(gradient(obj, p))) for p in pts)


def ctilde_violations(trace: Trace, c_tilde: float, rtol: float = DECREASE_RTOL) -> List[int]:
    bad = []
    for a, b in _pairs(trace):
        rhs = c_tilde * a.grad_norm**2
        if a.f - b.f < rhs - rtol * max(abs(rhs), abs(a.f), abs(b.f)):
            bad.append(a.k)
    return bad


def audit_trace(
    trace: Trace,
    obj: ObjectiveSpec,
    half_width: Optional[float] = None,
    seed: int = 0,
) -> AuditReport:
    """Run every audit the objective's metadata allows."""
    md = obj.metadata
    p = trace.params
    rep = AuditReport(monotone_ok=audit_monotonicity(trace))
    if trace.solver != "ASDM":
        rep.notes.append("baseline trace: only monotonicity and rate audits apply")
    elif md.mu is not None and md.v_exponent == p.v:
        mu = md.mu
        rep.eps_bar = epsilon_bound(p.eps0, mu, p.beta)
        rep.eps_bound_ok = audit_epsilon_bound(trace, mu)
        rep.c_bar = decrease_constant(p.rule, p.beta, p.v, p.eps0, mu)
        bad = decrease_violations(trace, rep.c_bar)
        rep.decrease_audit_ok = not bad
        if bad:
            rep.notes.append(f"decrease estimate fails at k={bad[:10]} (of {len(bad)})")
        bad = step_bound_violations(trace, mu)
        rep.step_bound_ok = not bad
        if bad:
            rep.notes.append(f"step lower bound fails at k={bad[:10]}")
        if p.v == 2:
            gamma_term = 1.0
        elif half_width is not None:
            gamma = estimate_gradient_bound(obj, p.start, half_width, np.random.default_rng(seed))
            gamma_term = gamma ** (p.v - 2)
            rep.notes.append(f"gamma estimated by box sampling: {gamma!r}")
        else:
            gamma_term = None
        if gamma_term is not None:
            rep.c_tilde = rep.c_bar * min(1.0, 1.0 / (rep.eps_bar * gamma_term))
            rep.ctilde_ok = not ctilde_violations(trace, rep.c_tilde)
    elif md.mu is not None:
        rep.notes.append(f"metadata mu is for v={md.v_exponent}, run uses v={p.v}; mu audits skipped")
    if md.f_star is not None:
        try:
            rep.rate_constant = fit_sublinear_constant(trace, md.f_star)
            rep.rate_tail_ok = bool(np.isfinite(rep.rate_constant)) and rate_tail_nonincreasing(trace, md.f_star)
        except ValueError as exc:
            rep.rate_tail_ok = False
            rep.notes.append(str(exc))
    if md.minimizers:
        rep.theta_min = theta_min(trace, obj)
        if rep.theta_min is not None and not rep.theta_min > 0:
            rep.notes.append(f"theta_min={rep.theta_min!r} is not positive")
    return rep


def steady_state_violations(trace: Trace, mu: float) -> List[int]:
    """Iterations at or after the first with eps_k >= mu that cost more than
    one function and one gradient evaluation or used a step other than eta."""
    p = trace.params
    step = eta(p.beta, p.v)
    bad = []
    started = False
    prev: Optional[IterationRecord] = None
    for r in trace.records:
        if not r.terminal and r.eps >= mu:
            started = True
        adjacent = prev is None or prev.k == r.k - 1
        if started and not r.terminal and adjacent:
            fcost = r.fevals_cum - (prev.fevals_cum if prev else 1)
            gcost = r.gevals_cum - (prev.gevals_cum if prev else 0)
            if r.i_k != 1 or r.lam != step or fcost != 1 or gcost != 1:
                bad.append(r.k)
        prev = r
    return bad
