"""End-to-end estimation pipeline for observed series."""

from __future__ import annotations

import logging
import warnings

import numpy as np

from .anneal import AnnealSchedule, sa_then_polish
from .exceptions import MixedVarError, NonFiniteObjective, SingularWeight
from .model import VarParams
from .objective import ObjectiveConfig, ObjectiveEvaluator
from .optimize import LocalOptConfig, StartStrategy, make_start, minimize_local
from .results import EstimationResult

logger = logging.getLogger(__name__)


def estimate_pipeline(Y: np.ndarray, p: int, start: StartStrategy,
                      obj_cfg: ObjectiveConfig,
                      optimizer: str = "local_only",
                      schedule: AnnealSchedule | None = None,
                      local_cfg: LocalOptConfig | None = None,
                      seed: int = 0, restarts: int = 1,
                      keep_trace: bool = False) -> EstimationResult:
    """Estimate a VAR(p) on a (presumed demeaned) data matrix.

    If the columns are not demeaned the pipeline demeans them itself and
    warns; the estimators fit no intercept. optimizer="local_only" builds
    the requested start and polishes it; optimizer="sa_then_polish" runs
    the annealing search (the start strategy is then recorded as
    "annealed").
    """
    from .io import is_demeaned, demean  # local import to avoid cycle in docs builds

    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if not is_demeaned(Y):
        warnings.warn("series is not demeaned; demeaning before estimation",
                      stacklevel=2)
        Y = demean(Y)
    n = Y.shape[1]

    if optimizer == "sa_then_polish":
        if schedule is None:
            schedule = AnnealSchedule(seed=seed)
        try:
            return sa_then_polish(Y, p, obj_cfg, schedule, local_cfg,
                                  restarts=restarts, keep_trace=keep_trace)
        except MixedVarError as exc:
            raise type(exc)(f"annealing stage: {exc}") from exc
    if optimizer != "local_only":
        raise ValueError(f"unknown optimizer {optimizer!r}")

    rng = np.random.default_rng(seed)
    try:
        theta0 = make_start(Y, start, p, rng=rng)
    except MixedVarError as exc:
        raise type(exc)(f"start stage: {exc}") from exc

    try:
        ev = ObjectiveEvaluator(Y, n, p, obj_cfg)
    except MixedVarError as exc:
        raise type(exc)(f"objective stage: {exc}") from exc

    def f(vec):
        try:
            return ev.value(VarParams.from_vector(vec, n, p))
        except (NonFiniteObjective, SingularWeight):
            return np.inf

    x0 = theta0.to_vector()
    local = minimize_local(f, x0, local_cfg)
    return EstimationResult.build(
        theta_hat=VarParams.from_vector(local.x, n, p),
        objective_value=local.f,
        start_used=start.kind,
        objective_at_start=float(f(x0)),
        converged=local.converged,
        iterations=local.iterations,
    )


def start_invariant(results: list, tol: float = 1e-3) -> bool:
    """True when every estimate in `results` agrees entry-wise within tol.

    Used to flag data sets where all starting strategies reach the same
    minimum, the practical signature of a well-identified model.
    """
    if len(results) < 2:
        return True
    ref = results[0].theta_hat.to_vector()
    for r in results[1:]:
        if not np.allclose(r.theta_hat.to_vector(), ref, atol=tol, rtol=0.0):
            return False
    return True
