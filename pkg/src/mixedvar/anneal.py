"""Simulated annealing over the coefficient box, with local polish.

Proposals are uniform over the box regardless of the current state, so the
chain can jump between the causal, mixed, and noncausal regions that trap
gradient-based methods. Uphill moves are accepted with the Metropolis
probability exp(-delta/temperature) under a geometric cooling schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteObjective, SingularWeight
from .model import VarParams
from .objective import ObjectiveConfig, ObjectiveEvaluator
from .optimize import LocalOptConfig, minimize_local
from .results import EstimationResult


@dataclass(frozen=True)
class AnnealSchedule:
    """Control parameters of the annealing run.

    The final temperature is t_max * r**(q_stages - 1), derived rather than
    stored. The default stage counts are a desk-scale schedule; the
    heavyweight reference setting is t_max=1600, r=0.85, q_stages=200,
    m_per_stage=1000 on the box [-3.5, 3.5].
    """

    t_max: float = 1600.0
    r: float = 0.85
    q_stages: int = 60
    m_per_stage: int = 200
    theta_min: float = -3.5
    theta_max: float = 3.5
    seed: int = 0

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if not 0.0 < self.r < 1.0:
            raise ValueError("cooling rate r must lie in (0, 1)")
        if self.q_stages < 1 or self.m_per_stage < 1:
            raise ValueError("q_stages and m_per_stage must be at least 1")
        if self.theta_min > self.theta_max:
            raise ValueError("theta_min must not exceed theta_max")

    @property
    def t_min(self) -> float:
        return self.t_max * self.r ** (self.q_stages - 1)


def paper_scale_schedule(seed: int = 0) -> AnnealSchedule:
    """The heavyweight reference schedule (Q=200 stages of M=1000 proposals)."""
    return AnnealSchedule(t_max=1600.0, r=0.85, q_stages=200, m_per_stage=1000,
                          theta_min=-3.5, theta_max=3.5, seed=seed)


@dataclass
class AnnealStageRecord:
    stage: int
    temperature: float
    accept_rate: float
    f_best: float
    uphill_proposals: int = 0
    uphill_accepts: int = 0


@dataclass
class AnnealResult:
    x_best: np.ndarray
    f_best: float
    trace: list
    n_evals: int
    n_nonfinite: int


def propose(current: np.ndarray, bounds: tuple, rng: np.random.Generator) -> np.ndarray:
    """Additive move m with m_j uniform on [theta_min - x_j, theta_max - x_j],
    so the proposal x_j + m_j is uniform on [theta_min, theta_max] and never
    leaves the box.
    """
    current = np.asarray(current, dtype=float)
    lo, hi = bounds
    m = rng.uniform(lo - current, hi - current)
    return np.clip(current + m, lo, hi)


def metropolis_accept(f_new: float, f_old: float, temperature: float,
                      rng: np.random.Generator) -> bool:
    """Downhill moves always accepted; uphill with probability
    exp(-(f_new - f_old)/temperature), by comparing against a uniform draw.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if f_new < f_old:
        return True
    p_accept = np.exp(-(f_new - f_old) / temperature)
    return p_accept > rng.uniform()


def anneal(f, dim: int, schedule: AnnealSchedule) -> AnnealResult:
    """Run the annealing chain and return the best point ever visited.

    The chain starts at a uniform random point in the box and runs exactly
    q_stages stages of m_per_stage proposals, multiplying the temperature
    by r between stages; the objective is evaluated exactly q_stages *
    m_per_stage times. Proposals with non-finite objective values are
    rejected outright and counted.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = np.random.default_rng(schedule.seed)
    bounds = (schedule.theta_min, schedule.theta_max)
    x = rng.uniform(schedule.theta_min, schedule.theta_max, size=dim)
    # sentinel: the first finite proposal is accepted unconditionally and
    # becomes the incumbent, keeping the evaluation count at Q*M exactly
    f_x = np.inf

    x_best = x.copy()
    f_best = np.inf
    trace = []
    n_evals = 0
    n_nonfinite = 0
    temperature = schedule.t_max
    for stage in range(schedule.q_stages):
        accepts = 0
        uphill = 0
        uphill_accepted = 0
        for _ in range(schedule.m_per_stage):
            cand = propose(x, bounds, rng)
            try:
                val = float(f(cand))
            except NonFiniteObjective:
                val = np.nan
            n_evals += 1
            if not np.isfinite(val):
                n_nonfinite += 1
                continue
            if val < f_best:
                f_best = val
                x_best = cand.copy()
            is_uphill = val >= f_x
            if metropolis_accept(val, f_x, temperature, rng):
                x, f_x = cand, val
                accepts += 1
                uphill_accepted += is_uphill
            uphill += is_uphill
        trace.append(AnnealStageRecord(
            stage=stage,
            temperature=temperature,
            accept_rate=accepts / schedule.m_per_stage,
            f_best=f_best,
            uphill_proposals=uphill,
            uphill_accepts=uphill_accepted,
        ))
        temperature *= schedule.r
    if not np.isfinite(f_best):
        raise NonFiniteObjective("no proposal produced a finite objective value")
    return AnnealResult(x_best=x_best, f_best=f_best, trace=trace,
                        n_evals=n_evals, n_nonfinite=n_nonfinite)


def sa_then_polish(Y: np.ndarray, p: int, obj_cfg: ObjectiveConfig,
                   schedule: AnnealSchedule,
                   local_cfg: LocalOptConfig | None = None,
                   restarts: int = 1, keep_trace: bool = False) -> EstimationResult:
    """Global annealing search over the coefficient box followed by a local polish.

    The annealing stage minimizes the objective over the flattened
    coefficient vector; its best point seeds the quasi-Newton polish. With
    restarts > 1 the annealing stage is repeated from fresh random states
    (seeds schedule.seed, schedule.seed + 1, ...) and the best run is kept.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = Y.shape[1]
    ev = ObjectiveEvaluator(Y, n, p, obj_cfg)

    def f(vec):
        try:
            return ev.value(VarParams.from_vector(vec, n, p))
        except (NonFiniteObjective, SingularWeight):
            return np.inf

    dim = n * n * p
    best = None
    for k in range(max(1, restarts)):
        sched_k = schedule if k == 0 else AnnealSchedule(
            t_max=schedule.t_max, r=schedule.r, q_stages=schedule.q_stages,
            m_per_stage=schedule.m_per_stage, theta_min=schedule.theta_min,
            theta_max=schedule.theta_max, seed=schedule.seed + k)
        run = anneal(f, dim, sched_k)
        if best is None or run.f_best < best.f_best:
            best = run

    local = minimize_local(f, best.x_best, local_cfg)
    theta_hat = VarParams.from_vector(local.x, n, p)
    notes = {"sa_evals": best.n_evals, "sa_nonfinite": best.n_nonfinite,
             "restarts": max(1, restarts)}
    if keep_trace:
        notes["sa_trace"] = [[rec.stage, rec.temperature, rec.accept_rate, rec.f_best]
                             for rec in best.trace]
    return EstimationResult.build(
        theta_hat=theta_hat,
        objective_value=local.f,
        start_used="annealed",
        objective_at_start=best.f_best,
        converged=local.converged,
        iterations=local.iterations,
        sa_objective=best.f_best,
        notes=notes,
    )
