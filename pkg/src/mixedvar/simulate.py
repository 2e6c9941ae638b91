"""Simulation of strictly stationary mixed causal-noncausal VAR(1) paths.

The mixed simulator decomposes Theta = A J A^-1, runs the causal block
forward and the noncausal block backward in the transformed coordinates,
recombines, and trims both path ends so boundary initialization does not
leak into the retained sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidDof, NotCausal
from .model import VarParams, classify_roots, spectral_decomposition

STUDENT_T = "student_t"
STANDARD_NORMAL = "standard_normal"


@dataclass(frozen=True)
class ErrorSpec:
    """I.i.d. error distribution for the simulators.

    Components are drawn independently, so for student_t the error
    variance matrix is (df / (df - 2)) * I_n.
    """

    n: int
    distribution: str = STUDENT_T
    df: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.distribution not in (STUDENT_T, STANDARD_NORMAL):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == STUDENT_T and self.df <= 2:
            raise InvalidDof(f"student_t needs df > 2 for finite variance, got {self.df}")


@dataclass(frozen=True)
class SimConfig:
    """Requested retained length and two-sided trim fraction."""

    T: int
    params: VarParams
    trim_frac: float = 0.10

    def __post_init__(self):
        if self.T < 10:
            raise ValueError("T must be at least 10")
        if not 0.0 <= self.trim_frac < 0.5:
            raise ValueError("trim_frac must lie in [0, 0.5)")


def draw_errors(spec: ErrorSpec, count: int) -> np.ndarray:
    """Draw a count x n matrix of i.i.d. zero-location errors.

    Deterministic given spec.seed: the same spec always produces the same
    matrix, and longer draws extend shorter ones row for row.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(spec.seed)
    if spec.distribution == STUDENT_T:
        return rng.standard_t(spec.df, size=(count, spec.n))
    return rng.standard_normal(size=(count, spec.n))


def _raw_length(T: int, trim_frac: float) -> tuple[int, int]:
    """Pre-trim length and per-side trim count for a requested T.

    ceil rounding plus floor trimming always retains at least T rows;
    the caller keeps the first T of them.
    """
    T_raw = math.ceil(T / (1.0 - 2.0 * trim_frac))
    cut = math.floor(trim_frac * T_raw)
    return T_raw, cut


def simulate_mixed(config: SimConfig, spec: ErrorSpec,
                   return_components: bool = False):
    """Simulate a strictly stationary mixed VAR(1) path of exactly config.T rows.

    Procedure: decompose Theta = A J A^-1 with the causal block first; draw
    T_raw = ceil(T / (1 - 2 trim_frac)) error vectors; map them into the
    eigenbasis u* = A^-1 u; run the causal coordinates forward from a zero
    state, Y1*_t = J1 Y1*_{t-1} + u1*_t, and the noncausal coordinates
    backward from a zero terminal state, Y2*_t = J2^-1 Y2*_{t+1} - J2^-1
    u2*_{t+1}; recombine Y_t = A1 Y1*_t + A2 Y2*_t; drop floor(trim_frac *
    T_raw) rows at each end and keep the first T retained rows.

    Every interior row satisfies Y_t = Theta Y_{t-1} + u_t exactly, so the
    retained block is an exact finite window of the two-sided stationary
    solution up to the boundary effect suppressed by trimming.

    With return_components=True also returns the retained causal and
    noncausal coordinate paths (Y1*, Y2*).
    """
    params = config.params
    if params.p != 1:
        raise ValueError("the mixed simulator is defined for p = 1")
    if spec.n != params.n:
        raise ValueError("error dimension does not match params")
    classify_roots(params)
    dec = spectral_decomposition(params)
    n1 = dec.order.n1

    T_raw, cut = _raw_length(config.T, config.trim_frac)
    u = draw_errors(spec, T_raw)
    u_star = u @ dec.A_inv.T

    j1 = dec.eigenvalues[:n1]
    j2 = dec.eigenvalues[n1:]

    y1 = np.zeros((T_raw, n1))
    if n1 > 0:
        prev = np.zeros(n1)
        for t in range(T_raw):
            prev = j1 * prev + u_star[t, :n1]
            y1[t] = prev

    y2 = np.zeros((T_raw, params.n - n1))
    if params.n - n1 > 0:
        j2_inv = 1.0 / j2
        nxt = np.zeros(params.n - n1)
        for t in range(T_raw - 2, -1, -1):
            nxt = j2_inv * (nxt - u_star[t + 1, n1:])
            y2[t] = nxt

    Y = y1 @ dec.A1.T + y2 @ dec.A2.T
    sl = slice(cut, cut + config.T)
    if return_components:
        return Y[sl], y1[sl], y2[sl]
    return Y[sl]


def simulate_causal(params: VarParams, spec: ErrorSpec, T: int,
                    burn_in: int = 0) -> np.ndarray:
    """Forward recursion Y_t = sum_i Theta_i Y_{t-i} + u_t from a zero state,
    dropping the first burn_in rows.

    Raises
    ------
    NotCausal
        If the parameter matrix has eigenvalues outside the unit circle.
    """
    order = classify_roots(params)
    if order.n2 > 0:
        raise NotCausal(f"{order.label} has {order.n2} explosive eigenvalues")
    if spec.n != params.n:
        raise ValueError("error dimension does not match params")
    if T < 1 or burn_in < 0:
        raise ValueError("T must be positive and burn_in nonnegative")

    total = T + burn_in
    u = draw_errors(spec, total)
    Y = np.zeros((total, params.n))
    state = [np.zeros(params.n) for _ in range(params.p)]
    for t in range(total):
        y = u[t].copy()
        for i, theta in enumerate(params.coefficients):
            y += theta @ state[i]
        Y[t] = y
        state = [y] + state[:-1]
    return Y[burn_in:]
