"""Starting-value strategies and a derivative-free-gradient local minimizer.

The minimizer is a BFGS quasi-Newton iteration fed by central-difference
gradients and guarded by a backtracking line search: candidate points with
non-finite objective values are rejected and the step is shrunk, and an
accepted iterate never increases the objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    NonFiniteObjective,
    SingularBasis,
    SingularDesign,
    SingularEstimate,
)
from .model import VarParams, assemble_from_jordan, classify_strict, counterpart

START_KINDS = (
    "ols",
    "reverse_ols",
    "true_params",
    "causal_counterpart",
    "noncausal_counterpart",
    "random_mixed",
    "annealed",
    "explicit",
)


@dataclass(frozen=True)
class StartStrategy:
    """How to pick the optimizer's initial coefficient matrices.

    - "ols" / "reverse_ols" are estimated from the data;
    - "true_params", "causal_counterpart", "noncausal_counterpart" and
      "explicit" derive from reference params supplied in `params`;
    - "random_mixed" draws a random matrix classified as `target_order`;
    - "annealed" marks results whose start came from the simulated-annealing
      stage (an objective-aware search, so it is produced by the SA
      optimizer path rather than by make_start).
    """

    kind: str
    params: VarParams | None = None
    target_order: tuple | None = None

    def __post_init__(self):
        if self.kind not in START_KINDS:
            raise ValueError(f"unknown start strategy {self.kind!r}")
        if self.kind in ("true_params", "causal_counterpart",
                         "noncausal_counterpart", "explicit") and self.params is None:
            raise ValueError(f"strategy {self.kind!r} needs reference params")
        if self.kind == "random_mixed" and self.target_order is None:
            raise ValueError("random_mixed needs a target (n1, n2)")


@dataclass(frozen=True)
class LocalOptConfig:
    """Stopping rules and finite-difference step for the local minimizer."""

    grad_step: float = 1e-6
    tol_grad: float = 1e-8
    tol_step: float = 1e-10
    max_iter: int = 500

    def __post_init__(self):
        if min(self.grad_step, self.tol_grad, self.tol_step) <= 0:
            raise ValueError("steps and tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class LocalOptResult:
    x: np.ndarray
    f: float
    converged: bool
    iterations: int
    n_evals: int


def ols_var(Y: np.ndarray, p: int) -> VarParams:
    """Least-squares fit of Y_t on (Y_{t-1}, ..., Y_{t-p}), no intercept.

    Data are assumed demeaned; raises SingularDesign when the stacked-lag
    Gram matrix is singular.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, n = Y.shape
    if T <= n * p + 1:
        raise SingularDesign(f"T={T} too small for n={n}, p={p}")
    X = np.hstack([Y[p - i:T - i] for i in range(1, p + 1)])
    target = Y[p:]
    gram = X.T @ X
    if np.linalg.cond(gram) > 1e12:
        raise SingularDesign("lag regressor Gram matrix is singular")
    B = np.linalg.solve(gram, X.T @ target)  # (n*p) x n
    coeffs = tuple(B[i * n:(i + 1) * n].T.copy() for i in range(p))
    return VarParams(n=n, p=p, coefficients=coeffs)


def reverse_ols(Y: np.ndarray, p: int = 1) -> VarParams:
    """Forward regression of Y_t on Y_{t+1}, inverted.

    Fitting Y_t = F Y_{t+1} + e and returning F^-1 yields a matrix whose
    eigenvalues are the reciprocals of the forward-OLS ones, i.e. a purely
    noncausal starting point for a mixed process.
    """
    if p != 1:
        raise ValueError("reverse_ols is defined for p = 1")
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, n = Y.shape
    if T <= n + 1:
        raise SingularDesign(f"T={T} too small for n={n}")
    X = Y[1:]
    target = Y[:-1]
    gram = X.T @ X
    if np.linalg.cond(gram) > 1e12:
        raise SingularDesign("lead regressor Gram matrix is singular")
    F = np.linalg.solve(gram, X.T @ target).T
    if np.linalg.cond(F) > 1e12:
        raise SingularEstimate("forward-regression matrix is not invertible")
    return VarParams.from_matrix(np.linalg.inv(F))


def random_mixed_params(n: int, target_order: tuple, rng: np.random.Generator,
                        max_tries: int = 200) -> VarParams:
    """Random VAR(1) matrix whose strict classification equals target_order.

    Eigenvalues are drawn uniformly from [0.2, 0.9] for the causal block and
    [1.1, 3.0] for the noncausal block, assembled through a random
    well-conditioned basis, and redrawn until the classification matches.
    """
    n1, n2 = target_order
    if n1 + n2 != n:
        raise ValueError(f"target order {target_order} does not sum to n={n}")
    for _ in range(max_tries):
        eigs = np.concatenate([
            rng.uniform(0.2, 0.9, size=n1),
            rng.uniform(1.1, 3.0, size=n2),
        ])
        A = rng.uniform(-1.0, 1.0, size=(n, n))
        if np.linalg.cond(A) > 50.0:
            continue
        try:
            params = assemble_from_jordan(A, eigs)
        except SingularBasis:
            continue
        order = classify_strict(params)
        if (order.n1, order.n2) == (n1, n2):
            return params
    raise RuntimeError(f"could not draw a matrix classified as {target_order}")


def make_start(Y: np.ndarray, strategy: StartStrategy, p: int,
               rng: np.random.Generator | None = None) -> VarParams:
    """Materialize a starting-value strategy on a data matrix."""
    if strategy.kind == "ols":
        return ols_var(Y, p)
    if strategy.kind == "reverse_ols":
        return reverse_ols(Y, p)
    if strategy.kind in ("true_params", "explicit"):
        return strategy.params
    if strategy.kind == "causal_counterpart":
        return counterpart(strategy.params, "causal")
    if strategy.kind == "noncausal_counterpart":
        return counterpart(strategy.params, "noncausal")
    if strategy.kind == "random_mixed":
        n = np.asarray(Y).shape[1] if np.asarray(Y).ndim == 2 else 1
        if p != 1:
            raise ValueError("random_mixed starts are defined for p = 1")
        if rng is None:
            rng = np.random.default_rng()
        return random_mixed_params(n, strategy.target_order, rng)
    raise ValueError(
        "annealed starts are produced by the simulated-annealing optimizer, "
        "not by make_start"
    )


def central_gradient(f, x: np.ndarray, step: float) -> tuple:
    """Central-difference gradient with per-coordinate step step*(1+|x_i|).

    Returns (gradient, evaluation count). Non-finite samples propagate as
    NaN entries for the caller to handle.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g, 2 * x.size


def minimize_local(f, x0, cfg: LocalOptConfig | None = None) -> LocalOptResult:
    """BFGS minimization with numeric gradients and a backtracking line search.

    Guarantees f(x*) <= f(x0). The converged flag is set when the gradient
    norm drops below tol_grad or the accepted step below tol_step before
    max_iter iterations. Candidate points where f is non-finite are
    rejected by shrinking the step; NonFiniteObjective is raised only when
    f(x0) itself is non-finite.
    """
    if cfg is None:
        cfg = LocalOptConfig()
    x = np.asarray(x0, dtype=float).copy()
    fx = float(f(x))
    n_evals = 1
    if not np.isfinite(fx):
        raise NonFiniteObjective("objective is not finite at the starting point")

    dim = x.size
    H = np.eye(dim)  # inverse-Hessian approximation
    g, ne = central_gradient(f, x, cfg.grad_step)
    n_evals += ne
    if not np.all(np.isfinite(g)):
        return LocalOptResult(x=x, f=fx, converged=False, iterations=0, n_evals=n_evals)

    converged = False
    it = 0
    first_update = True
    for it in range(1, cfg.max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < cfg.tol_grad:
            converged = True
            break

        d = -H @ g
        slope = float(g @ d)
        if slope >= 0:  # not a descent direction; reset to steepest descent
            H = np.eye(dim)
            d = -g
            slope = -gnorm ** 2
            first_update = True

        # Armijo backtracking; non-finite trial values shrink the step too
        alpha = 1.0
        accepted = False
        x_new = x
        f_new = fx
        for _ in range(40):
            cand = x + alpha * d
            val = float(f(cand))
            n_evals += 1
            if np.isfinite(val) and val <= fx + 1e-4 * alpha * slope:
                x_new, f_new, accepted = cand, val, True
                break
            alpha *= 0.5
        if not accepted:
            break

        s = x_new - x
        step_norm = float(np.linalg.norm(s))
        x, fx = x_new, f_new
        if step_norm < cfg.tol_step:
            converged = True
            break

        g_new, ne = central_gradient(f, x, cfg.grad_step)
        n_evals += ne
        if not np.all(np.isfinite(g_new)):
            break
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * step_norm * float(np.linalg.norm(y)):
            if first_update:
                # scale the initial inverse Hessian before the first update
                H = (sy / float(y @ y)) * np.eye(dim)
                first_update = False
            rho = 1.0 / sy
            Hy = H @ y
            H = H + np.outer(s, s) * (rho * (1.0 + rho * float(y @ Hy))) \
                - rho * (np.outer(Hy, s) + np.outer(s, Hy))
        g = g_new

    return LocalOptResult(x=x, f=fx, converged=converged, iterations=it, n_evals=n_evals)
