import math

import numpy as np
import pytest

from asdm.directions import normalize
from asdm.errors import BacktrackExhausted
from asdm.objectives import CountingObjective, ObjectiveSpec
from asdm.problems import get_problem
from asdm.step_rules import Rule, backtrack, eta, mu_lower_estimate, rule1_holds, rule2_holds, step_lower_bound
from oracles import quad, scan_oracle


def test_rule1_examples(half_sq_1d, steep):
    one = np.array([1.0])
    assert rule1_holds(half_sq_1d, one, one, -one, 0.5, 0.5, fx=0.5)
    assert not rule1_holds(steep, one, 100 * one, -100 * one, 0.5, 0.5, fx=50.0)
    assert rule1_holds(steep, one, 100 * one, -100 * one, 0.0078125, 0.5, fx=50.0)


def test_rule1_threshold_on_steep_quadratic(steep):
    # the condition reduces to lam <= 0.01
    one = np.array([1.0])
    assert rule1_holds(steep, one, 100 * one, -100 * one, 0.01, 0.5, fx=50.0)
    assert not rule1_holds(steep, one, 100 * one, -100 * one, 0.0101, 0.5, fx=50.0)


def test_rule2_examples(half_sq_1d):
    one = np.array([1.0])
    assert rule2_holds(half_sq_1d, one, -one, 0.5, 0.5, 1.0, 2, fx=0.5)
    assert not rule2_holds(half_sq_1d, one, -one, 0.5, 0.5, 2.0, 2, fx=0.5)


def test_rules_share_rhs_on_normalization_boundary(steep):
    # s = -g with eps = 1 and ||g||^2 = -<g, s>: both right-hand sides equal
    x, g = np.array([1.0]), np.array([100.0])
    s = -g
    for lam in 0.5 ** np.arange(1, 12):
        assert rule1_holds(steep, x, g, s, lam, 0.5, fx=50.0) == rule2_holds(steep, x, s, lam, 0.5, 1.0, 2, fx=50.0)


def test_rule_costs_one_evaluation(half_sq_1d):
    fn = CountingObjective(half_sq_1d)
    one = np.array([1.0])
    rule1_holds(fn, one, one, -one, 0.5, 0.5, fx=0.5)
    rule2_holds(fn, one, -one, 0.5, 0.5, 1.0, 2, fx=0.5)
    assert fn.fevals == 2


def test_non_finite_trial_counts_as_failure():
    obj = ObjectiveSpec(1, lambda x: 0.5 * x[0] ** 2 if x[0] > -0.6 else float("nan"), lambda x: x.copy())
    x, g = np.array([1.0]), np.array([1.0])
    s = np.array([-4.0])
    assert not rule1_holds(obj, x, g, s, 0.5, 0.5, fx=0.5)
    res = backtrack(obj, x, g, s, 0.5, 0.25, 2, Rule.RULE1, fx=0.5)
    assert res.i_star >= 2


def test_backtrack_examples(half_sq_1d, steep):
    one = np.array([1.0])
    r = backtrack(half_sq_1d, one, one, -one, 0.5, 1.0, 2, Rule.RULE1, fx=0.5)
    assert (r.i_star, r.lam, r.x_next[0], r.trial_count) == (1, 0.5, 0.5, 1)
    r = backtrack(steep, one, 100 * one, -100 * one, 0.5, 1.0, 2, Rule.RULE1, fx=50.0)
    assert (r.i_star, r.lam, r.x_next[0]) == (7, 0.0078125, 0.21875)
    assert r.trial_count == 7 and r.f_next < 50.0


def test_backtrack_trial_count_equals_function_evaluations(steep):
    fn = CountingObjective(steep)
    one = np.array([1.0])
    r = backtrack(fn, one, 100 * one, -100 * one, 0.5, 1.0, 2, Rule.RULE1, fx=50.0)
    assert fn.fevals == r.trial_count == r.i_star


def test_backtrack_exhaustion_reports_best_trial():
    # ascent direction: no step can pass
    obj = quad(1.0)
    x, g = np.array([1.0]), np.array([1.0])
    with pytest.raises(BacktrackExhausted) as info:
        backtrack(obj, x, g, np.array([1.0]), 0.5, 1.0, 2, Rule.RULE1, i_cap=5, fx=0.5)
    assert info.value.trials == 5
    assert info.value.best_lambda == 0.5**5


@pytest.mark.parametrize("rule", [1, 2])
def test_backtrack_matches_scan_oracle(rule):
    rng = np.random.default_rng(100 + rule)
    for _ in range(100):
        a, c = 10 ** rng.uniform(-1, 2), rng.uniform(-2, 2)
        obj = quad(a, c)
        x = np.array([rng.uniform(-5, 5)])
        beta, eps = rng.uniform(0.05, 0.95), 10 ** rng.uniform(-2, 2)
        g = obj.gradient_fn(x)
        s = normalize(g, eps, 2).s
        fx = obj.value_fn(x)
        got = backtrack(obj, x, g, s, beta, eps, 2, rule, fx=fx)
        want = scan_oracle(obj.value_fn, x, fx, g, s, beta, eps, 2, rule)
        assert (got.i_star, got.lam) == want
        # minimality: the previous index fails
        if got.i_star > 1:
            prev = eta(beta, 2) ** (got.i_star - 1)
            holds = rule1_holds(obj, x, g, s, prev, beta, fx=fx) if rule == 1 else rule2_holds(obj, x, s, prev, beta, eps, 2, fx=fx)
            assert not holds


def test_rule1_implies_rule2_for_normalized_directions():
    rng = np.random.default_rng(11)
    pr = get_problem("lse")
    for _ in range(10_000):
        x = pr.random_start(rng)
        g = pr.objective.gradient_fn(x)
        eps = 10 ** rng.uniform(-2, 2)
        s = normalize(g, eps, 2).s
        lam, beta = 10 ** rng.uniform(-4, 0), rng.uniform(0.05, 0.95)
        fx = pr.objective.value_fn(x)
        if rule1_holds(pr.objective, x, g, s, lam, beta, fx=fx):
            assert rule2_holds(pr.objective, x, s, lam, beta, eps, 2, fx=fx)


def test_step_lower_bound_examples():
    assert step_lower_bound(1.0, 50.0, 0.5, 2) == pytest.approx(0.005, rel=1e-15)
    assert step_lower_bound(0.25, 1.0, 0.5, 3) == pytest.approx(0.25, rel=1e-15)
    assert 0.0078125 > step_lower_bound(1.0, 50.0, 0.5, 2)
    with pytest.raises(ValueError):
        step_lower_bound(2.0, 1.0, 0.5, 2)


def test_mu_lower_estimate_examples():
    assert mu_lower_estimate(1.0, 0.5, 0.0078125, 2) == 32.0
    assert mu_lower_estimate(1.0, 0.5, 1.0, 2) == 0.25
    assert mu_lower_estimate(2.0, 0.5, 0.5, 3) == 2.0


@pytest.mark.parametrize("pid", ["quad1d", "steepquad", "quad", "lse", "fractional-ball"])
def test_accepted_step_exceeds_lower_bound_and_index_is_finite(pid):
    pr = get_problem(pid)
    mu = pr.metadata.mu
    rng = np.random.default_rng(5)
    for _ in range(300):
        x = pr.random_start(rng)
        g = pr.objective.gradient_fn(x)
        if not np.any(g):
            continue
        eps, beta = mu * 10 ** rng.uniform(-3, -1e-3), rng.uniform(0.1, 0.9)
        s = normalize(g, eps, 2).s
        fx = pr.objective.value_fn(x)
        for rule in (1, 2):
            r = backtrack(pr.objective, x, g, s, beta, eps, 2, rule, fx=fx)
            assert r.f_next < fx
            bound = step_lower_bound(eps, mu, beta, 2)
            assert r.i_star <= math.ceil(math.log(bound) / math.log(eta(beta, 2))) + 1
            if float(g @ s) + mu * float(s @ s) > 0:
                assert r.lam > bound
