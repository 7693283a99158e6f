"""The adaptive steepest descent loop and baseline gradient solvers.

Each iteration: gradient -> stopping test -> eps-normalized direction ->
backtracking step -> advance -> eps update. The step index ``i_k`` feeds
back into the normalization parameter as ``eps *= (1-beta)**(1-i_k)``, so
eps only grows and stops changing once single trials succeed.
"""

from __future__ import annotations

import collections
import enum
import logging
from dataclasses import dataclass, field, replace
from typing import List, Sequence

import numpy as np

from .directions import normalization_gap, normalize
from .errors import BacktrackExhausted, ConfigurationError
from .objectives import CountingObjective, ObjectiveSpec, Point, as_point
from .step_rules import DEFAULT_I_CAP, Rule, backtrack, eta

log = logging.getLogger(__name__)

EPS_WARN_LEVEL = 1e12
RECORD_LIMIT = 10**6
RECORD_KEEP = 1000


class Status(str, enum.Enum):
    GRAD_TOLERANCE = "GradToleranceReached"
    MAX_ITERS = "MaxIters"
    BACKTRACK_EXHAUSTED = "BacktrackExhausted"


class Baseline(str, enum.Enum):
    FIXED_STEP = "FixedStep"
    CLASSIC_ARMIJO = "ClassicArmijo"


@dataclass(frozen=True)
class SolverParams:
    start: Sequence[float]
    beta: float = 0.5
    eps0: float = 1.0
    v: float = 2.0
    rule: Rule = Rule.RULE1
    grad_tol: float = 1e-8
    max_iters: int = 100_000
    i_cap: int = DEFAULT_I_CAP
    record_limit: int = RECORD_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        try:
            object.__setattr__(self, "rule", Rule(int(self.rule)))
        except ValueError:
            raise ConfigurationError(f"rule must be 1 or 2, got {self.rule!r}") from None
        if not (0.0 < self.beta < 1.0):
            raise ConfigurationError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.eps0 > 0:
            raise ConfigurationError(f"eps0 must be > 0, got {self.eps0}")
        if not self.v >= 2:
            raise ConfigurationError(f"v must be >= 2, got {self.v}")
        if not self.grad_tol > 0:
            raise ConfigurationError(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.max_iters < 0:
            raise ConfigurationError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.i_cap < 1:
            raise ConfigurationError(f"i_cap must be >= 1, got {self.i_cap}")
        if self.record_limit < 1:
            raise ConfigurationError(f"record_limit must be >= 1, got {self.record_limit}")

    @property
    def eta(self) -> float:
        return eta(self.beta, self.v)


@dataclass(frozen=True)
class IterationRecord:
    """State at x_k and the step taken from it.

    The last record of every trace is terminal: it describes the final point
    and carries ``i_k = 0``, ``lam = 0`` and no direction.
    ``step_norm`` is ``||s_k||``, the norm of the normalized direction.
    """

    k: int
    x: Point
    f: float
    grad_norm: float
    eps: float
    i_k: int
    lam: float
    step_norm: float
    dir_dot_grad: float
    was_rescaled: bool
    fevals_cum: int
    gevals_cum: int

    @property
    def terminal(self) -> bool:
        return self.i_k == 0


@dataclass
class Trace:
    records: List[IterationRecord]
    status: Status
    final_x: Point
    params: SolverParams
    problem_id: str = ""
    seed: int = 0
    solver: str = "ASDM"
    thinned: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def final_f(self) -> float:
        return self.records[-1].f

    @property
    def steps(self) -> List[IterationRecord]:
        """Records that carry an accepted step."""
        return [r for r in self.records if not r.terminal]

    @property
    def iterations(self) -> int:
        return self.records[-1].k

    @property
    def fevals(self) -> int:
        return self.records[-1].fevals_cum

    @property
    def gevals(self) -> int:
        return self.records[-1].gevals_cum


class _RecordBuffer:
    """Keeps every record up to ``limit``; beyond that the first and last
    ``keep`` records stay exact and the middle is reservoir-sampled."""

    def __init__(self, limit: int, keep: int, rng: np.random.Generator):
        self.limit = max(limit, 2 * keep + 1)
        self.keep = keep
        self.rng = rng
        self.items: List[IterationRecord] = []
        self.thinned = False
        self._tail: collections.deque = collections.deque()
        self._middle: List[IterationRecord] = []
        self._seen = 0

    def append(self, rec: IterationRecord) -> None:
        if not self.thinned:
            self.items.append(rec)
            if len(self.items) > self.limit:
                self.thinned = True
                middle = self.items[self.keep : -self.keep]
                self._tail = collections.deque(self.items[-self.keep :])
                self.items = self.items[: self.keep]
                for r in middle:
                    self._push_middle(r)
            return
        self._tail.append(rec)
        if len(self._tail) > self.keep:
            self._push_middle(self._tail.popleft())

    def _push_middle(self, rec: IterationRecord) -> None:
        self._seen += 1
        cap = self.limit - 2 * self.keep
        if len(self._middle) < cap:
            self._middle.append(rec)
            return
        j = int(self.rng.integers(0, self._seen))
        if j < cap:
            self._middle[j] = rec

    def records(self) -> List[IterationRecord]:
        if not self.thinned:
            return list(self.items)
        return self.items + sorted(self._middle, key=lambda r: r.k) + list(self._tail)


def stopping(g: Point, grad_tol: float) -> bool:
    """True iff ||g|| <= grad_tol."""
    if grad_tol <= 0:
        raise ValueError("grad_tol must be positive")
    return float(np.linalg.norm(g)) <= grad_tol


def update_epsilon(eps_k: float, i_k: int, beta: float) -> float:
    """eps_k (1-beta)^(1-i_k); unchanged when the first trial succeeded."""
    if eps_k <= 0 or i_k < 1 or not (0.0 < beta < 1.0):
        raise ValueError("need eps_k > 0, i_k >= 1 and 0 < beta < 1")
    if i_k == 1:
        return eps_k
    return eps_k * (1.0 - beta) ** (1 - i_k)


def solve(obj: ObjectiveSpec, params: SolverParams, problem_id: str = "", seed: int = 0) -> Trace:
    """Run ASDM from ``params.start``.

    Backtrack exhaustion ends the run with status ``BacktrackExhausted``;
    a non-finite value at an accepted point or a non-finite gradient raises
    :class:`~asdm.errors.ObjectiveDomainError`.
    """
    fn = CountingObjective(obj)
    x = as_point(params.start, fn.dimension)
    fx = fn.value(x)
    eps = params.eps0
    buf = _RecordBuffer(params.record_limit, RECORD_KEEP, np.random.default_rng(seed))
    notes: List[str] = []
    warned = False
    status = Status.MAX_ITERS
    k = 0
    while True:
        g = fn.gradient(x)
        gnorm = float(np.linalg.norm(g))
        if stopping(g, params.grad_tol):
            status = Status.GRAD_TOLERANCE
            break
        if k >= params.max_iters:
            status = Status.MAX_ITERS
            break
        d = normalize(g, eps, params.v)
        gap = normalization_gap(g, d.s, eps, params.v)
        if gap > 1e-12 * (1.0 + gnorm**2):
            notes.append(f"k={k}: direction not eps-normalized (gap {gap:.3e})")
        try:
            step = backtrack(fn, x, g, d.s, params.beta, eps, params.v, params.rule, params.i_cap, fx=fx)
        except BacktrackExhausted as exc:
            status = Status.BACKTRACK_EXHAUSTED
            notes.append(
                f"k={k}: backtracking exhausted after {exc.trials} trials "
                f"(best lambda {exc.best_lambda!r}, best f {exc.best_value!r}, f(x_k) {fx!r})"
            )
            break
        buf.append(
            IterationRecord(
                k=k,
                x=x,
                f=fx,
                grad_norm=gnorm,
                eps=eps,
                i_k=step.i_star,
                lam=step.lam,
                step_norm=float(np.linalg.norm(d.s)),
                dir_dot_grad=float(g @ d.s),
                was_rescaled=d.was_rescaled,
                fevals_cum=fn.fevals,
                gevals_cum=fn.gevals,
            )
        )
        x, fx = step.x_next, step.f_next
        eps = update_epsilon(eps, step.i_star, params.beta)
        if eps > EPS_WARN_LEVEL and not warned:
            warned = True
            msg = f"k={k}: eps={eps:.3e} exceeds {EPS_WARN_LEVEL:.0e}; objective may violate Condition A here"
            log.warning(msg)
            notes.append(msg)
        k += 1
    buf.append(_terminal(k, x, fx, g, eps, fn))
    return Trace(
        records=buf.records(),
        status=status,
        final_x=x,
        params=params,
        problem_id=problem_id or obj.name,
        seed=seed,
        thinned=buf.thinned,
        notes=notes,
    )


def _terminal(k, x, fx, g, eps, fn) -> IterationRecord:
    return IterationRecord(
        k=k,
        x=x,
        f=fx,
        grad_norm=float(np.linalg.norm(g)),
        eps=eps,
        i_k=0,
        lam=0.0,
        step_norm=0.0,
        dir_dot_grad=0.0,
        was_rescaled=False,
        fevals_cum=fn.fevals,
        gevals_cum=fn.gevals,
    )


def solve_baseline(
    obj: ObjectiveSpec,
    kind: Baseline,
    params: SolverParams,
    problem_id: str = "",
    seed: int = 0,
) -> Trace:
    """Plain gradient descent for comparison, in the same trace schema.

    ``FixedStep`` steps by ``1/L`` from the objective metadata.
    ``ClassicArmijo`` halves a unit step until
    ``f(x) - f(x - lam g) >= beta lam ||g||^2``. The ``eps`` field is 0.
    """
    kind = Baseline(kind)
    lip = obj.metadata.lipschitz_L
    if kind is Baseline.FIXED_STEP and lip is None:
        raise ConfigurationError(f"FixedStep needs lipschitz_L metadata on {obj.name!r}")
    fn = CountingObjective(obj)
    x = as_point(params.start, fn.dimension)
    fx = fn.value(x)
    buf = _RecordBuffer(params.record_limit, RECORD_KEEP, np.random.default_rng(seed))
    notes: List[str] = []
    k = 0
    while True:
        g = fn.gradient(x)
        gnorm = float(np.linalg.norm(g))
        if stopping(g, params.grad_tol):
            status = Status.GRAD_TOLERANCE
            break
        if k >= params.max_iters:
            status = Status.MAX_ITERS
            break
        gg = float(g @ g)
        if kind is Baseline.FIXED_STEP:
            lam, trials = 1.0 / lip, 1
            x_new = x - lam * g
            f_new = fn.value(x_new)
        else:
            lam, trials = 1.0, 0
            while True:
                trials += 1
                x_new = x - lam * g
                f_new = fn.value(x_new, check=False)
                if np.isfinite(f_new) and fx - f_new >= params.beta * lam * gg:
                    break
                if trials >= params.i_cap:
                    break
                lam *= 0.5
            if not (np.isfinite(f_new) and fx - f_new >= params.beta * lam * gg):
                status = Status.BACKTRACK_EXHAUSTED
                notes.append(f"k={k}: Armijo halving exhausted after {trials} trials")
                break
        buf.append(
            IterationRecord(k, x, fx, gnorm, 0.0, trials, lam, gnorm, -gg, False, fn.fevals, fn.gevals)
        )
        x, fx = x_new, f_new
        k += 1
    buf.append(_terminal(k, x, fx, g, 0.0, fn))
    return Trace(
        records=buf.records(),
        status=status,
        final_x=x,
        params=params,
        problem_id=problem_id or obj.name,
        seed=seed,
        solver=kind.value,
        thinned=buf.thinned,
        notes=notes,
    )


def with_start(params: SolverParams, start) -> SolverParams:
    return replace(params, start=as_point(start))
