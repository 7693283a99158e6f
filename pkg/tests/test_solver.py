import logging

import numpy as np
import pytest

from asdm.errors import ConfigurationError, ObjectiveDomainError
from asdm.objectives import ObjectiveMetadata, ObjectiveSpec
from asdm.problems import SUITE, get_problem
from asdm.solver import Baseline, SolverParams, Status, solve, solve_baseline, stopping, update_epsilon


def test_stopping_examples():
    assert stopping(np.zeros(2), 1e-8)
    assert stopping(np.array([1e-9, 0.0]), 1e-8)
    assert not stopping(np.array([1.0, 0.0]), 1e-8)


def test_update_epsilon_examples():
    assert update_epsilon(1.0, 1, 0.5) == 1.0
    assert update_epsilon(2.0, 3, 0.5) == 8.0
    assert update_epsilon(1.0, 7, 0.5) == 64.0
    with pytest.raises(ValueError):
        update_epsilon(1.0, 0, 0.5)


def test_steep_quadratic_desk_run(steep):
    tr = solve(steep, SolverParams(start=[1.0], beta=0.5, eps0=1.0, v=2, rule=1, max_iters=2))
    r0, r1, r2 = tr.records
    assert (r0.i_k, r0.lam, r0.eps, r0.was_rescaled) == (7, 0.0078125, 1.0, False)
    assert r1.x[0] == 0.21875 and r1.eps == 64.0
    # second iteration: rescaled direction -21.875/64, first trial accepted
    assert r1.was_rescaled and r1.step_norm == 21.875 / 64
    assert (r1.i_k, r1.lam) == (1, 0.5)
    assert r1.f == pytest.approx(2.3926, abs=5e-5)
    assert r2.f == pytest.approx(0.1145, abs=5e-5)
    assert r2.terminal and tr.status is Status.MAX_ITERS


def test_half_square_desk_run(half_sq_1d):
    tr = solve(half_sq_1d, SolverParams(start=[1.0]))
    r0, r1 = tr.records[:2]
    assert (r0.i_k, r0.lam, r1.x[0]) == (1, 0.5, 0.5)
    assert all(r.eps == 1.0 for r in tr.records)
    assert tr.status is Status.GRAD_TOLERANCE


def test_start_at_minimizer(half_norm_2d):
    tr = solve(half_norm_2d, SolverParams(start=[0.0, 0.0]))
    assert tr.status is Status.GRAD_TOLERANCE
    assert len(tr.records) == 1 and tr.records[0].terminal and tr.iterations == 0
    assert (tr.fevals, tr.gevals) == (1, 1)


@pytest.mark.parametrize("pid", SUITE)
@pytest.mark.parametrize("rule", [1, 2])
def test_trace_invariants(pid, rule):
    pr = get_problem(pid)
    tr = solve(pr.objective, SolverParams(start=pr.start, rule=rule))
    assert tr.status is Status.GRAD_TOLERANCE
    fs = [r.f for r in tr.records]
    assert all(b < a for a, b in zip(fs, fs[1:]))
    eps = [r.eps for r in tr.records]
    assert all(b >= a for a, b in zip(eps, eps[1:]))
    assert tr.records[-1].grad_norm <= 1e-8
    steps = tr.steps
    assert all(r.dir_dot_grad + r.eps * r.step_norm**2 <= 1e-12 * (1 + r.grad_norm**2) for r in steps)
    assert all(r.step_norm <= r.grad_norm for r in steps)


def test_evaluation_accounting(steep):
    tr = solve(steep, SolverParams(start=[1.0], max_iters=5))
    prev_f, prev_g = 1, 0
    for r in tr.steps:
        assert r.fevals_cum - prev_f == r.i_k
        assert r.gevals_cum - prev_g == 1
        prev_f, prev_g = r.fevals_cum, r.gevals_cum


def test_backtrack_exhaustion_status(steep):
    tr = solve(steep, SolverParams(start=[1.0], i_cap=3))
    assert tr.status is Status.BACKTRACK_EXHAUSTED
    assert len(tr.records) == 1 and "exhausted" in tr.notes[0]


def test_non_finite_start_aborts():
    obj = ObjectiveSpec(1, lambda x: float("nan"), lambda x: np.zeros(1))
    with pytest.raises(ObjectiveDomainError):
        solve(obj, SolverParams(start=[0.0]))


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"beta": 1.5}, "beta"),
        ({"beta": 0.0}, "beta"),
        ({"eps0": 0.0}, "eps0"),
        ({"v": 1.5}, "v"),
        ({"rule": 3}, "rule"),
        ({"grad_tol": -1.0}, "grad_tol"),
        ({"i_cap": 0}, "i_cap"),
    ],
)
def test_param_validation(kwargs, message):
    with pytest.raises(ConfigurationError, match=message):
        SolverParams(start=[1.0], **kwargs)


def test_eps_warning_for_huge_curvature(caplog):
    big = ObjectiveSpec(1, lambda x: 0.5e14 * x[0] ** 2, lambda x: 1e14 * x, ObjectiveMetadata(lipschitz_L=1e14))
    with caplog.at_level(logging.WARNING, logger="asdm.solver"):
        tr = solve(big, SolverParams(start=[1.0], max_iters=3))
    assert any("exceeds" in n for n in tr.notes)
    assert "exceeds" in caplog.text


def test_record_thinning_keeps_head_and_tail():
    lin = ObjectiveSpec(1, lambda x: float(x[0]), lambda x: np.ones(1))
    tr = solve(lin, SolverParams(start=[0.0], max_iters=5000, record_limit=2001), seed=3)
    assert tr.status is Status.MAX_ITERS and tr.thinned
    ks = [r.k for r in tr.records]
    assert len(ks) == 2001 and ks == sorted(ks)
    assert ks[:1000] == list(range(1000))
    assert ks[-1000:] == list(range(4001, 5001))


def test_fixed_step_baseline():
    for pid in ("quad1d", "steepquad"):
        pr = get_problem(pid)
        tr = solve_baseline(pr.objective, Baseline.FIXED_STEP, SolverParams(start=[1.0]))
        assert tr.records[1].x[0] == 0.0 and tr.iterations == 1
        assert tr.solver == "FixedStep"


def test_fixed_step_needs_lipschitz():
    obj = ObjectiveSpec(1, lambda x: float(x[0] ** 2), lambda x: 2 * x)
    with pytest.raises(ConfigurationError):
        solve_baseline(obj, Baseline.FIXED_STEP, SolverParams(start=[1.0]))


def test_classic_armijo_accepts_unit_step_on_boundary(half_sq_1d):
    tr = solve_baseline(half_sq_1d, Baseline.CLASSIC_ARMIJO, SolverParams(start=[1.0], beta=0.5))
    assert tr.records[0].lam == 1.0 and tr.records[0].i_k == 1
    assert tr.records[1].x[0] == 0.0


def test_classic_armijo_backtracks(steep):
    tr = solve_baseline(steep, Baseline.CLASSIC_ARMIJO, SolverParams(start=[1.0], beta=0.5))
    assert tr.status is Status.GRAD_TOLERANCE
    assert tr.records[0].lam < 0.01
    fs = [r.f for r in tr.records]
    assert all(b < a for a, b in zip(fs, fs[1:]))
