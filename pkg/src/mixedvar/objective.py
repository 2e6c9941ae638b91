"""Portmanteau-type objective functions built from residual autocovariances.

Residuals of a candidate VAR are pushed through element-wise linear and
nonlinear transforms; the objective aggregates the sample autocovariances
of the transformed series over lags 1..H, weighted by the inverse of the
lag-0 covariance (gcov22) or by its diagonal inverse (gcov17). At the true
parameters the residuals are i.i.d., every transform is serially
uncorrelated, and the objective collapses toward zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import LagTooLarge, LengthMismatch, NonFiniteObjective, SingularWeight
from .model import VarParams

LOG_SQUARE_EPS = 1e-12

GCOV22 = "gcov22"
GCOV17 = "gcov17"

TRANSFORM_KINDS = ("identity", "square", "cube", "fourth_power", "log_square", "sign")


@dataclass(frozen=True)
class TransformFn:
    """One element-wise map, tagged with the residual component it reads."""

    component: int
    kind: str

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.component < 0:
            raise ValueError("component index must be nonnegative")


@dataclass(frozen=True)
class TransformSet:
    """Ordered list of K element-wise residual transforms.

    The stock sets for an n-dimensional residual are:

    - T1: u_i, u_i^2, u_i^3, u_i^4 for every component (K = 4n);
    - T2: u_i and log(u_i^2) (K = 2n);
    - T3: sign(u_i) and u_i^2 (K = 2n);
    - T4: sign(u_i) and log(u_i^2) (K = 2n).

    log(u^2) is clamped below at log(eps) and sign(0) = 0, so transformed
    values stay finite for residuals at or near zero.
    """

    id: str
    functions: tuple

    def __post_init__(self):
        if len(self.functions) == 0:
            raise ValueError("a transform set needs at least one function")
        object.__setattr__(self, "functions", tuple(self.functions))

    @property
    def K(self) -> int:
        return len(self.functions)

    def components_read(self) -> set:
        return {f.component for f in self.functions}

    def validate_for_dimension(self, n: int):
        if self.K < n:
            raise ValueError(f"need at least n={n} transforms, got K={self.K}")
        read = self.components_read()
        missing = set(range(n)) - read
        if missing:
            raise ValueError(f"residual components never read by any transform: {sorted(missing)}")
        out_of_range = [c for c in read if c >= n]
        if out_of_range:
            raise ValueError(f"transform reads nonexistent components: {sorted(out_of_range)}")


def _per_component(n: int, kinds) -> tuple:
    return tuple(TransformFn(i, kind) for kind in kinds for i in range(n))


def make_transform_set(set_id: str, n: int) -> TransformSet:
    """Build one of the stock transform sets T1-T4 for dimension n."""
    kinds_by_id = {
        "T1": ("identity", "square", "cube", "fourth_power"),
        "T2": ("identity", "log_square"),
        "T3": ("sign", "square"),
        "T4": ("sign", "log_square"),
    }
    if set_id not in kinds_by_id:
        raise ValueError(f"unknown transform set {set_id!r}; expected one of {sorted(kinds_by_id)}")
    return TransformSet(id=set_id, functions=_per_component(n, kinds_by_id[set_id]))


@dataclass(frozen=True)
class ObjectiveConfig:
    """Objective settings: lag depth H, estimator variant, transforms, ridge.

    ridge is a relative regularization factor: ridge * trace(G0) / K is
    added to the diagonal of the lag-0 covariance before inversion.
    """

    transforms: TransformSet
    H: int = 10
    variant: str = GCOV22
    ridge: float = 1e-10

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("H must be at least 1")
        if self.variant not in (GCOV22, GCOV17):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


def residuals(Y: np.ndarray, params: VarParams) -> np.ndarray:
    """Residuals u_t = Y_t - sum_i Theta_i Y_{t-i} for t = p+1..T.

    Returns a (T - p) x n matrix; raises LengthMismatch when T <= p.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T = Y.shape[0]
    p = params.p
    if T <= p:
        raise LengthMismatch(f"need more than p={p} observations, got T={T}")
    if Y.shape[1] != params.n:
        raise ValueError(f"data has {Y.shape[1]} columns, params expect {params.n}")
    u = Y[p:].copy()
    for i, theta in enumerate(params.coefficients, start=1):
        u -= Y[p - i:T - i] @ theta.T
    return u


def apply_transforms(u: np.ndarray, ts: TransformSet) -> np.ndarray:
    """Apply each transform column-wise; returns an m x K matrix."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    ts.validate_for_dimension(u.shape[1])
    Z = np.empty((u.shape[0], ts.K))
    # squares are shared across square / fourth_power / log_square columns
    sq = u * u
    for k, f in enumerate(ts.functions):
        c = f.component
        if f.kind == "identity":
            Z[:, k] = u[:, c]
        elif f.kind == "square":
            Z[:, k] = sq[:, c]
        elif f.kind == "cube":
            Z[:, k] = sq[:, c] * u[:, c]
        elif f.kind == "fourth_power":
            Z[:, k] = sq[:, c] * sq[:, c]
        elif f.kind == "log_square":
            Z[:, k] = np.log(np.maximum(sq[:, c], LOG_SQUARE_EPS))
        else:  # sign
            Z[:, k] = np.sign(u[:, c])
    return Z


def autocov(Z: np.ndarray, h: int) -> np.ndarray:
    """Sample autocovariance Gamma(h) of the columns of Z at lag h >= 0.

    Gamma(h) = (1/m) sum_{t=h+1..m} (z_t - zbar)(z_{t-h} - zbar)', with zbar
    the full-sample column mean and m the number of rows. The 1/m divisor
    keeps Gamma(0) positive semidefinite.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    m = Z.shape[0]
    if h < 0:
        raise ValueError("lag must be nonnegative")
    if h >= m:
        raise LagTooLarge(f"lag {h} with only {m} rows")
    Zc = Z - Z.mean(axis=0)
    if h == 0:
        return (Zc.T @ Zc) / m
    return (Zc[h:].T @ Zc[:-h]) / m


class ObjectiveEvaluator:
    """Objective bound to a fixed data matrix and configuration.

    Precomputes the lag slices of Y so repeated evaluations at different
    candidate parameters (optimizer inner loops) only pay for residuals,
    transforms, and the H + 1 covariance products.
    """

    def __init__(self, Y: np.ndarray, n: int, p: int, cfg: ObjectiveConfig):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[1] != n:
            raise ValueError(f"data has {Y.shape[1]} columns, expected {n}")
        T = Y.shape[0]
        if T <= p:
            raise LengthMismatch(f"need more than p={p} observations, got T={T}")
        m = T - p
        if m <= cfg.H + 1:
            raise LengthMismatch(f"residual length {m} must exceed H+1={cfg.H + 1}")
        cfg.transforms.validate_for_dimension(n)
        self.n = n
        self.p = p
        self.cfg = cfg
        self._target = Y[p:]
        self._lags = [Y[p - i:T - i] for i in range(1, p + 1)]
        self._m = m

    def residuals_at(self, params: VarParams) -> np.ndarray:
        u = self._target.copy()
        for lag, theta in zip(self._lags, params.coefficients):
            u -= lag @ theta.T
        return u

    def value(self, params: VarParams) -> float:
        """Objective value at a candidate parameter set.

        Raises NonFiniteObjective when transformed residuals overflow and
        SingularWeight when the ridged lag-0 covariance cannot be inverted.
        """
        if params.n != self.n or params.p != self.p:
            raise ValueError("params shape does not match the evaluator")
        cfg = self.cfg
        Z = apply_transforms(self.residuals_at(params), cfg.transforms)
        if not np.all(np.isfinite(Z)):
            raise NonFiniteObjective("transformed residuals overflowed")
        m, K = Z.shape
        Zc = Z - Z.mean(axis=0)
        G0 = (Zc.T @ Zc) / m
        d0 = np.diag(G0)
        if not np.all(np.isfinite(d0)):
            raise NonFiniteObjective("lag-0 covariance is not finite")
        if np.all(d0 <= 0.0):
            # every transformed column is constant, so every lagged
            # autocovariance vanishes identically
            return 0.0

        # Weights are built in correlation scale: with sd the column standard
        # deviations, G0 = diag(sd) R diag(sd), and the ridge is applied to R
        # (where trace/K is exactly 1). This keeps the weighting exactly
        # equivariant under rescaling of individual transform columns, which
        # the raw-scale ridge is not once heavy-tailed columns inflate the
        # trace.
        sd = np.sqrt(np.maximum(d0, 0.0))
        sd[sd <= 0.0] = 1.0  # constant columns: all their covariances are zero
        inv_sd = 1.0 / sd
        R = G0 * np.outer(inv_sd, inv_sd)

        if cfg.variant == GCOV22:
            try:
                R_inv = np.linalg.inv(R + cfg.ridge * np.eye(K))
            except np.linalg.LinAlgError:
                raise SingularWeight("lag-0 covariance is singular after ridging")
            if not np.all(np.isfinite(R_inv)):
                raise SingularWeight("lag-0 covariance inverse is not finite")
        else:
            inv_r = np.full(K, 1.0 / (1.0 + cfg.ridge))

        total = 0.0
        scale = np.outer(inv_sd, inv_sd)
        for h in range(1, cfg.H + 1):
            C = ((Zc[h:].T @ Zc[:-h]) / m) * scale
            if cfg.variant == GCOV22:
                # Tr[C W C' W] with symmetric W, via two K x K products
                total += float(np.sum((C @ R_inv) * (R_inv @ C)))
            else:
                total += float(inv_r @ (C * C) @ inv_r)
        if not np.isfinite(total):
            raise NonFiniteObjective("objective value is not finite")
        return total


def objective(Y: np.ndarray, params: VarParams, cfg: ObjectiveConfig) -> float:
    """Objective value for a candidate parameter set on a data matrix.

    gcov22 returns sum_{h=1..H} Tr[G(h) G(0)^-1 G(h)' G(0)^-1] where G(h)
    is the sample autocovariance of the transformed residuals; gcov17
    replaces both weight factors by the inverse of diag(G(0)). Both are
    nonnegative, and zero exactly when every lagged autocovariance vanishes.
    """
    return ObjectiveEvaluator(Y, params.n, params.p, cfg).value(params)


def objective_slice(Y: np.ndarray, params: VarParams, entry: tuple,
                    grid, cfg: ObjectiveConfig, lag: int = 1) -> list:
    """One-dimensional slice of the objective through a single coefficient.

    For each grid value g, evaluates the objective with entry (i, j) of the
    lag-`lag` coefficient matrix replaced by g and every other entry held
    fixed. Entry indices are 1-based, matching coefficient naming.

    Returns a list of (grid_value, objective_value) pairs.
    """
    i, j = entry
    if not (1 <= i <= params.n and 1 <= j <= params.n):
        raise ValueError(f"entry {entry} out of range for n={params.n}")
    if not (1 <= lag <= params.p):
        raise ValueError(f"lag {lag} out of range for p={params.p}")
    ev = ObjectiveEvaluator(Y, params.n, params.p, cfg)
    out = []
    for g in grid:
        mats = [c.copy() for c in params.coefficients]
        mats[lag - 1][i - 1, j - 1] = float(g)
        candidate = VarParams(n=params.n, p=params.p, coefficients=tuple(mats))
        out.append((float(g), ev.value(candidate)))
    return out
