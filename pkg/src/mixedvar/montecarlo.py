"""Replicated simulate-estimate-classify experiments.

Each replication simulates a fresh path, builds a starting value, runs the
chosen optimizer, and classifies the estimate with the strict modulus-1
cut. The report aggregates identification frequencies over the order
labels and exports per-coefficient histogram data, per-replication
records, and a manifest sufficient to re-run any single replication.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .anneal import AnnealSchedule, sa_then_polish
from .exceptions import MixedVarError, NonFiniteObjective, SingularWeight
from .model import ModelOrder, VarParams, classify_strict
from .objective import ObjectiveConfig, ObjectiveEvaluator, TransformFn, TransformSet, make_transform_set
from .optimize import LocalOptConfig, StartStrategy, make_start, minimize_local
from .results import EstimationResult
from .simulate import ErrorSpec, SimConfig, simulate_mixed

logger = logging.getLogger(__name__)

LOCAL_ONLY = "local_only"
SA_THEN_POLISH = "sa_then_polish"


def classify_estimate(theta_hat: VarParams) -> ModelOrder:
    """Order label of an estimated matrix under the strict modulus-1 cut."""
    return classify_strict(theta_hat)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment."""

    dgp_params: VarParams
    errors: ErrorSpec
    sim: SimConfig
    start: StartStrategy
    estimator: ObjectiveConfig
    optimizer: str = LOCAL_ONLY
    schedule: AnnealSchedule | None = None
    local_cfg: LocalOptConfig = field(default_factory=LocalOptConfig)
    N: int = 100
    seed_base: int = 0
    histogram_bins: int = 60
    workers: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.histogram_bins < 10:
            raise ValueError("histogram_bins must be at least 10")
        if self.optimizer not in (LOCAL_ONLY, SA_THEN_POLISH):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.optimizer == SA_THEN_POLISH and self.schedule is None:
            raise ValueError("sa_then_polish needs an AnnealSchedule")


@dataclass
class McReport:
    """Aggregated experiment outcome."""

    config: ExperimentConfig
    frequencies: dict            # label -> fraction of classified replications
    counts: dict                 # label -> count
    records: list                # per-replication dicts, ordered by index
    failures: list               # (index, reason) pairs
    histograms: dict             # coefficient name -> (bin_edges, counts)

    @property
    def n_classified(self) -> int:
        return sum(self.counts.values())


def replication_seeds(seed_base: int, i: int) -> tuple:
    """Derive independent (simulation, optimizer) seeds for replication i."""
    sim_seed, opt_seed = np.random.SeedSequence(seed_base + i).generate_state(2, dtype=np.uint64)
    return int(sim_seed), int(opt_seed)


def run_replication(cfg: ExperimentConfig, i: int) -> dict:
    """Run one replication; returns a JSON-friendly record."""
    sim_seed, opt_seed = replication_seeds(cfg.seed_base, i)
    record = {"replication": i, "sim_seed": sim_seed, "opt_seed": opt_seed}
    spec = ErrorSpec(n=cfg.errors.n, distribution=cfg.errors.distribution,
                     df=cfg.errors.df, seed=sim_seed)
    try:
        Y = simulate_mixed(SimConfig(T=cfg.sim.T, params=cfg.dgp_params,
                                     trim_frac=cfg.sim.trim_frac), spec)
        result = estimate_one(Y, cfg, opt_seed)
    except MixedVarError as exc:
        record.update(failed=True, reason=f"{type(exc).__name__}: {exc}")
        return record
    record.update(
        failed=False,
        start_used=result.start_used,
        theta_hat=result.theta_hat.to_json_dict(),
        coefficients=result.theta_hat.to_vector().tolist(),
        label=result.order.label,
        n1=result.order.n1,
        n2=result.order.n2,
        objective_at_start=result.objective_at_start,
        objective_value=result.objective_value,
        converged=result.converged,
        iterations=result.iterations,
    )
    if result.sa_objective is not None:
        record["sa_objective"] = result.sa_objective
    return record


def estimate_one(Y: np.ndarray, cfg: ExperimentConfig, opt_seed: int) -> EstimationResult:
    """Estimate a single simulated path according to the experiment config."""
    n, p = cfg.dgp_params.n, cfg.dgp_params.p
    if cfg.optimizer == SA_THEN_POLISH:
        sched = cfg.schedule
        sched = AnnealSchedule(t_max=sched.t_max, r=sched.r, q_stages=sched.q_stages,
                               m_per_stage=sched.m_per_stage, theta_min=sched.theta_min,
                               theta_max=sched.theta_max, seed=opt_seed)
        return sa_then_polish(Y, p, cfg.estimator, sched, cfg.local_cfg)

    rng = np.random.default_rng(opt_seed)
    theta0 = make_start(Y, cfg.start, p, rng=rng)
    ev = ObjectiveEvaluator(Y, n, p, cfg.estimator)

    def f(vec):
        try:
            return ev.value(VarParams.from_vector(vec, n, p))
        except (NonFiniteObjective, SingularWeight):
            return np.inf

    x0 = theta0.to_vector()
    local = minimize_local(f, x0, cfg.local_cfg)
    return EstimationResult.build(
        theta_hat=VarParams.from_vector(local.x, n, p),
        objective_value=local.f,
        start_used=cfg.start.kind,
        objective_at_start=float(f(x0)),
        converged=local.converged,
        iterations=local.iterations,
    )


def run_experiment(cfg: ExperimentConfig) -> McReport:
    """Run all N replications and aggregate.

    Replication i derives its seeds from seed_base + i, so any record can be
    reproduced in isolation. Results are reduced in replication order, which
    makes the report independent of worker scheduling.
    """
    indices = range(cfg.N)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(run_replication, [cfg] * cfg.N, indices,
                                    chunksize=max(1, cfg.N // (4 * cfg.workers))))
    else:
        records = [run_replication(cfg, i) for i in indices]

    failures = [(r["replication"], r["reason"]) for r in records if r["failed"]]
    classified = [r for r in records if not r["failed"]]
    if not classified:
        raise MixedVarError(
            f"all {cfg.N} replications failed; first reason: {failures[0][1]}")
    if failures:
        logger.warning("%d of %d replications failed", len(failures), cfg.N)

    np_total = cfg.dgp_params.n * cfg.dgp_params.p
    labels = [ModelOrder(k, np_total - k, cfg.dgp_params.p).label
              for k in range(np_total, -1, -1)]
    counts = {label: 0 for label in labels}
    for r in classified:
        counts[r["label"]] = counts.get(r["label"], 0) + 1
    n_classified = len(classified)
    frequencies = {label: c / n_classified for label, c in counts.items()}

    names = cfg.dgp_params.coefficient_names()
    coef_matrix = np.array([r["coefficients"] for r in classified])
    histograms = {}
    for j, name in enumerate(names):
        histograms[name] = coefficient_histogram(coef_matrix[:, j], cfg.histogram_bins)

    return McReport(config=cfg, frequencies=frequencies, counts=counts,
                    records=records, failures=failures, histograms=histograms)


def coefficient_histogram(values: np.ndarray, bins: int) -> tuple:
    """Histogram over the observed range, robust to runaway estimates.

    A handful of replications can drift to enormous coefficients (the
    fully-weighted objective is scale invariant far from the origin, so
    the landscape flattens out there); binning over the raw min/max would
    collapse all regular mass into one bin. The range is therefore clipped
    to a wide quantile window (median +/- 5 times the 5-95 percentile
    spread) and clipped values land in the edge bins, keeping the total
    count equal to the number of classified replications.
    """
    values = np.asarray(values, dtype=float)
    q05, q50, q95 = np.percentile(values, [5, 50, 95])
    spread = max(q95 - q05, 1e-12)
    lo = max(values.min(), q50 - 5.0 * spread)
    hi = min(values.max(), q50 + 5.0 * spread)
    if lo >= hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(np.clip(values, lo, hi), bins=bins, range=(lo, hi))
    return edges, counts


def histogram_modes(bin_edges: np.ndarray, counts: np.ndarray,
                    valley_frac: float = 0.35,
                    min_mass_frac: float = 0.05,
                    min_separation: float = 0.6,
                    smooth_bins: int = 3) -> list:
    """Locations of well-separated histogram modes.

    Counts are smoothed with a short moving average. A local maximum of
    height h qualifies as a candidate mode when the contiguous region where
    the smoothed curve stays above valley_frac * h contains no taller peak
    (so it sits behind genuine valleys, not on a shoulder) and holds at
    least min_mass_frac of the total mass.

    Candidates are then accepted tallest first; a lower candidate is merged
    away unless its distance from every accepted mode exceeds
    min_separation times the magnitude of their midpoint. Coefficient modes
    produced by reciprocating an eigenvalue sit at (j, 1/j), whose gap
    relative to midpoint shrinks to zero as j approaches one, so this
    dimensionless rule is what makes near-unit satellite clusters read as a
    single regime while well-separated counterpart modes stay distinct.

    Returns peak bin centers in ascending order; two returned modes always
    have a valley bin between them.
    """
    counts = np.asarray(counts, dtype=float)
    edges = np.asarray(bin_edges, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = counts.sum()
    if total <= 0:
        return []
    w = max(1, int(smooth_bins))
    s = np.convolve(counts, np.ones(w) / w, mode="same")
    nb = s.size

    candidates = []
    for i in range(nb):
        h = s[i]
        if h <= 0:
            continue
        if (i > 0 and s[i - 1] >= h) or (i < nb - 1 and s[i + 1] > h):
            continue  # not a local max; plateaus collapse to their left edge
        floor = valley_frac * h
        lo = i
        while lo > 0 and s[lo - 1] > floor:
            lo -= 1
        hi = i
        while hi < nb - 1 and s[hi + 1] > floor:
            hi += 1
        if np.max(s[lo:hi + 1]) > h:
            continue  # a taller peak shares the region: this is a shoulder
        if counts[lo:hi + 1].sum() < min_mass_frac * total:
            continue
        candidates.append((h, float(centers[i])))

    accepted = []
    for h, loc in sorted(candidates, reverse=True):
        distinct = True
        for other in accepted:
            midpoint = abs(loc + other) / 2.0
            if abs(loc - other) < min_separation * max(midpoint, 1e-12):
                distinct = False
                break
        if distinct:
            accepted.append(loc)
    return sorted(accepted)


def has_two_nonadjacent_modes(bin_edges, counts, valley_frac: float = 0.35,
                              min_mass_frac: float = 0.05,
                              min_separation: float = 0.6) -> bool:
    return len(histogram_modes(bin_edges, counts, valley_frac,
                               min_mass_frac, min_separation)) >= 2


# ---------------------------------------------------------------------------
# JSON round-trip for configs, reports, and the export layout
# ---------------------------------------------------------------------------

def _transforms_to_json(ts: TransformSet) -> dict:
    if ts.id in ("T1", "T2", "T3", "T4"):
        return {"id": ts.id}
    return {"id": "custom",
            "functions": [{"component": f.component, "kind": f.kind} for f in ts.functions]}


def _transforms_from_json(obj, n: int) -> TransformSet:
    if isinstance(obj, str):
        return make_transform_set(obj, n)
    if obj["id"] != "custom":
        return make_transform_set(obj["id"], n)
    fns = tuple(TransformFn(int(f["component"]), f["kind"]) for f in obj["functions"])
    return TransformSet(id="custom", functions=fns)


def experiment_to_json(cfg: ExperimentConfig) -> dict:
    out = {
        "dgp": {
            "params": cfg.dgp_params.to_json_dict(),
            "errors": {"distribution": cfg.errors.distribution, "df": cfg.errors.df},
            "sim": {"T": cfg.sim.T, "trim_frac": cfg.sim.trim_frac},
        },
        "start": {"kind": cfg.start.kind},
        "objective": {
            "H": cfg.estimator.H,
            "variant": cfg.estimator.variant,
            "transforms": _transforms_to_json(cfg.estimator.transforms),
            "ridge": cfg.estimator.ridge,
        },
        "optimizer": {"kind": cfg.optimizer},
        "local": {
            "grad_step": cfg.local_cfg.grad_step,
            "tol_grad": cfg.local_cfg.tol_grad,
            "tol_step": cfg.local_cfg.tol_step,
            "max_iter": cfg.local_cfg.max_iter,
        },
        "N": cfg.N,
        "seed_base": cfg.seed_base,
        "histogram_bins": cfg.histogram_bins,
        "workers": cfg.workers,
    }
    if cfg.start.params is not None:
        out["start"]["params"] = cfg.start.params.to_json_dict()
    if cfg.start.target_order is not None:
        out["start"]["target_order"] = list(cfg.start.target_order)
    if cfg.schedule is not None:
        s = cfg.schedule
        out["optimizer"]["schedule"] = {
            "t_max": s.t_max, "r": s.r, "q_stages": s.q_stages,
            "m_per_stage": s.m_per_stage, "theta_min": s.theta_min,
            "theta_max": s.theta_max,
        }
    return out


def experiment_from_json(obj: dict) -> ExperimentConfig:
    params = VarParams.from_json_dict(obj["dgp"]["params"])
    err = obj["dgp"].get("errors", {})
    errors = ErrorSpec(n=params.n,
                       distribution=err.get("distribution", "student_t"),
                       df=float(err.get("df", 4.0)))
    sim_obj = obj["dgp"].get("sim", {})
    sim = SimConfig(T=int(sim_obj.get("T", 1000)), params=params,
                    trim_frac=float(sim_obj.get("trim_frac", 0.10)))

    start_obj = obj.get("start", {"kind": "ols"})
    start_params = None
    if "params" in start_obj:
        start_params = VarParams.from_json_dict(start_obj["params"])
    elif start_obj.get("kind") in ("true_params", "causal_counterpart", "noncausal_counterpart"):
        start_params = params
    target = start_obj.get("target_order")
    start = StartStrategy(kind=start_obj.get("kind", "ols"), params=start_params,
                          target_order=None if target is None else tuple(target))

    o = obj.get("objective", {})
    estimator = ObjectiveConfig(
        transforms=_transforms_from_json(o.get("transforms", "T1"), params.n),
        H=int(o.get("H", 10)),
        variant=o.get("variant", "gcov22"),
        ridge=float(o.get("ridge", 1e-10)),
    )

    opt_obj = obj.get("optimizer", {"kind": LOCAL_ONLY})
    schedule = None
    if "schedule" in opt_obj:
        s = opt_obj["schedule"]
        schedule = AnnealSchedule(
            t_max=float(s.get("t_max", 1600.0)), r=float(s.get("r", 0.85)),
            q_stages=int(s.get("q_stages", 60)), m_per_stage=int(s.get("m_per_stage", 200)),
            theta_min=float(s.get("theta_min", -3.5)), theta_max=float(s.get("theta_max", 3.5)),
        )
    elif opt_obj.get("kind") == SA_THEN_POLISH:
        schedule = AnnealSchedule()

    lo = obj.get("local", {})
    local_cfg = LocalOptConfig(
        grad_step=float(lo.get("grad_step", 1e-6)),
        tol_grad=float(lo.get("tol_grad", 1e-8)),
        tol_step=float(lo.get("tol_step", 1e-10)),
        max_iter=int(lo.get("max_iter", 500)),
    )

    return ExperimentConfig(
        dgp_params=params, errors=errors, sim=sim, start=start,
        estimator=estimator, optimizer=opt_obj.get("kind", LOCAL_ONLY),
        schedule=schedule, local_cfg=local_cfg,
        N=int(obj.get("N", 100)), seed_base=int(obj.get("seed_base", 0)),
        histogram_bins=int(obj.get("histogram_bins", 60)),
        workers=int(obj.get("workers", 1)),
    )


def export_report(report: McReport, out_dir: str) -> dict:
    """Write frequencies.csv, histograms.csv, records.jsonl, and manifest.json.

    Returns the written paths. Failed replications appear in the manifest
    and records, never in the frequency denominators.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise MixedVarError(f"cannot create output directory {out_dir!r}: {exc}") from exc
    paths = {}

    def _write(name, writer):
        path = os.path.join(out_dir, name)
        try:
            with open(path, "w", encoding="utf-8") as fh:
                writer(fh)
        except OSError as exc:
            raise MixedVarError(f"cannot write {path!r}: {exc}") from exc
        paths[name] = path

    def _frequencies(fh):
        fh.write("label,count,frequency\n")
        for label, c in report.counts.items():
            fh.write(f"{label},{c},{report.frequencies[label]:.10g}\n")

    def _histograms(fh):
        fh.write("coefficient,bin_left,bin_right,count\n")
        for name, (edges, counts) in report.histograms.items():
            for k in range(counts.size):
                fh.write(f"{name},{edges[k]:.10g},{edges[k + 1]:.10g},{counts[k]}\n")

    def _records(fh):
        for r in report.records:
            fh.write(json.dumps(r) + "\n")

    def _manifest(fh):
        json.dump({
            "package_version": __version__,
            "config": experiment_to_json(report.config),
            "n_replications": report.config.N,
            "n_classified": report.n_classified,
            "n_failed": len(report.failures),
            "failures": [{"replication": i, "reason": why} for i, why in report.failures],
            "seeds": [dict(zip(("sim_seed", "opt_seed"),
                               replication_seeds(report.config.seed_base, i)))
                      for i in range(report.config.N)],
        }, fh, indent=2)

    _write("frequencies.csv", _frequencies)
    _write("histograms.csv", _histograms)
    _write("records.jsonl", _records)
    _write("manifest.json", _manifest)
    return paths
