"""Command-line surface: simulate, estimate, slice, montecarlo.

Every subcommand takes an optional --config JSON file whose values are
overridden by flags, honors --seed, and writes machine-readable output to
stdout or --out. Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .anneal import AnnealSchedule
from .estimation import estimate_pipeline, start_invariant
from .exceptions import MixedVarError
from .io import demean, load_series, require_length
from .model import VarParams
from .montecarlo import experiment_from_json, export_report, run_experiment
from .objective import ObjectiveConfig, make_transform_set, objective_slice
from .optimize import StartStrategy, ols_var
from .simulate import ErrorSpec, SimConfig, simulate_mixed


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MixedVarError(f"cannot read config {path!r}: {exc}") from exc


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as exc:
        raise UsageError(f"non-numeric grid bound in {spec!r}") from exc
    if step <= 0 or stop < start:
        raise UsageError("grid needs stop >= start and step > 0")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


def _parse_entry(spec: str) -> tuple:
    try:
        i, j = (int(x) for x in spec.split(","))
    except ValueError as exc:
        raise UsageError(f"entry must be i,j with 1-based indices, got {spec!r}") from exc
    return i, j


def _write_text(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params_from_file(path: str) -> VarParams:
    with open(path, "r", encoding="utf-8") as fh:
        return VarParams.from_json_dict(json.load(fh))


def _objective_config(args, n: int) -> ObjectiveConfig:
    return ObjectiveConfig(
        transforms=make_transform_set(args.transforms, n),
        H=args.H,
        variant=args.variant,
    )


def _schedule_from_args(args, seed: int) -> AnnealSchedule:
    return AnnealSchedule(
        t_max=args.sa_tmax, r=args.sa_r, q_stages=args.sa_stages,
        m_per_stage=args.sa_proposals, theta_min=args.sa_min,
        theta_max=args.sa_max, seed=seed,
    )


def _add_objective_flags(p: argparse.ArgumentParser):
    p.add_argument("--transforms", default="T1", choices=["T1", "T2", "T3", "T4"],
                   help="residual transform set (default T1)")
    p.add_argument("--H", type=int, default=10, help="highest autocovariance lag")
    p.add_argument("--variant", default="gcov22", choices=["gcov22", "gcov17"])


def _add_sa_flags(p: argparse.ArgumentParser):
    p.add_argument("--sa-tmax", type=float, default=1600.0)
    p.add_argument("--sa-r", type=float, default=0.85)
    p.add_argument("--sa-stages", type=int, default=60)
    p.add_argument("--sa-proposals", type=int, default=200)
    p.add_argument("--sa-min", type=float, default=-3.5)
    p.add_argument("--sa-max", type=float, default=3.5)
    p.add_argument("--restarts", type=int, default=1,
                   help="independent annealing runs; the best one is kept")
    p.add_argument("--sa-trace", default=None, metavar="CSV",
                   help="dump per-stage annealing trace to this CSV")


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if "params" not in cfg:
        raise UsageError("simulate needs a config file with a 'params' object")
    params = VarParams.from_json_dict(cfg["params"])
    T = args.T if args.T is not None else int(cfg.get("T", 1000))
    trim = args.trim_frac if args.trim_frac is not None else float(cfg.get("trim_frac", 0.10))
    err = cfg.get("errors", {})
    seed = args.seed if args.seed is not None else int(err.get("seed", 0))
    spec = ErrorSpec(n=params.n, distribution=err.get("distribution", "student_t"),
                     df=float(err.get("df", 4.0)), seed=seed)
    Y = simulate_mixed(SimConfig(T=T, params=params, trim_frac=trim), spec)

    header = ",".join(f"y{k + 1}" for k in range(params.n))
    body = "\n".join(",".join(f"{v:.12g}" for v in row) for row in Y)
    _write_text(header + "\n" + body + "\n", args.out)
    if args.out:
        manifest = {
            "params": params.to_json_dict(),
            "T": T,
            "trim_frac": trim,
            "errors": {"distribution": spec.distribution, "df": spec.df, "seed": seed},
        }
        base, _ = os.path.splitext(args.out)
        with open(base + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
    return 0


def _load_data(args) -> np.ndarray:
    series = load_series(args.data)
    require_length(series)
    return demean(series.values)


def _cmd_estimate(args) -> int:
    Y = _load_data(args)
    n = Y.shape[1]
    obj_cfg = _objective_config(args, n)
    seed = args.seed if args.seed is not None else 0

    results = []
    for kind in [s.strip() for s in args.start.split(",") if s.strip()]:
        if kind == "sa":
            schedule = _schedule_from_args(args, seed)
            res = estimate_pipeline(Y, args.p, StartStrategy(kind="ols"),
                                    obj_cfg, optimizer="sa_then_polish",
                                    schedule=schedule, seed=seed,
                                    restarts=args.restarts,
                                    keep_trace=bool(args.sa_trace))
            if args.sa_trace:
                rows = ["stage,temperature,accept_rate,f_best"]
                rows += [f"{s_},{t:.10g},{a:.10g},{fb:.12g}"
                         for s_, t, a, fb in res.notes.get("sa_trace", [])]
                with open(args.sa_trace, "w", encoding="utf-8") as fh:
                    fh.write("\n".join(rows) + "\n")
                res.notes.pop("sa_trace", None)
        else:
            params = _params_from_file(args.params) if args.params else None
            start = StartStrategy(kind=kind, params=params)
            res = estimate_pipeline(Y, args.p, start, obj_cfg,
                                    optimizer="local_only", seed=seed)
        results.append(res)

    if len(results) == 1:
        payload = results[0].to_json_dict()
    else:
        payload = {
            "results": [r.to_json_dict() for r in results],
            "start_invariant": start_invariant(results),
        }
    _write_text(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_slice(args) -> int:
    Y = _load_data(args)
    n = Y.shape[1]
    params = _params_from_file(args.params) if args.params else ols_var(Y, args.p)
    obj_cfg = _objective_config(args, n)
    grid = _parse_grid(args.grid)
    pairs = objective_slice(Y, params, _parse_entry(args.entry), grid, obj_cfg,
                            lag=args.lag)
    lines = ["grid_value,objective"]
    lines += [f"{g:.12g},{v:.12g}" for g, v in pairs]
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_montecarlo(args) -> int:
    cfg_obj = _load_config(args.config)
    if not cfg_obj:
        raise UsageError("montecarlo needs --config pointing at an experiment JSON")
    if args.seed is not None:
        cfg_obj["seed_base"] = args.seed
    if args.workers is not None:
        cfg_obj["workers"] = args.workers
    cfg = experiment_from_json(cfg_obj)
    report = run_experiment(cfg)
    paths = export_report(report, args.out)
    summary = {
        "out_dir": args.out,
        "files": sorted(paths),
        "n_classified": report.n_classified,
        "n_failed": len(report.failures),
        "frequencies": report.frequencies,
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="mixedvar",
                     description="Mixed causal-noncausal VAR toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a mixed VAR path to CSV")
    p_sim.add_argument("--config", required=True, help="JSON with params/T/trim_frac/errors")
    p_sim.add_argument("--T", type=int, default=None)
    p_sim.add_argument("--trim-frac", type=float, default=None, dest="trim_frac")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate a VAR from a CSV series")
    p_est.add_argument("--data", required=True)
    p_est.add_argument("--p", type=int, default=1)
    p_est.add_argument("--start", default="ols",
                       help="comma-separated strategies: ols, reverse_ols, sa, explicit")
    p_est.add_argument("--params", default=None,
                       help="VarParams JSON for --start explicit")
    p_est.add_argument("--seed", type=int, default=None)
    p_est.add_argument("--out", default=None)
    _add_objective_flags(p_est)
    _add_sa_flags(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    p_slc = sub.add_parser("slice", help="objective slice along one coefficient")
    p_slc.add_argument("--data", required=True)
    p_slc.add_argument("--p", type=int, default=1)
    p_slc.add_argument("--entry", required=True, help="1-based i,j")
    p_slc.add_argument("--lag", type=int, default=1)
    p_slc.add_argument("--grid", required=True, help="start:stop:step")
    p_slc.add_argument("--params", default=None,
                       help="base VarParams JSON (default: OLS fit)")
    p_slc.add_argument("--seed", type=int, default=None)
    p_slc.add_argument("--out", default=None)
    _add_objective_flags(p_slc)
    p_slc.set_defaults(func=_cmd_slice)

    p_mc = sub.add_parser("montecarlo", help="run a replicated experiment")
    p_mc.add_argument("--config", required=True)
    p_mc.add_argument("--out", required=True, help="output directory")
    p_mc.add_argument("--seed", type=int, default=None, help="override seed_base")
    p_mc.add_argument("--workers", type=int, default=None)
    p_mc.set_defaults(func=_cmd_montecarlo)

    return parser


def _merge_grid_token(argv):
    """Join '--grid -0.5:2.5:0.01' into one token so argparse does not
    mistake a negative grid start for an option flag."""
    merged = []
    i = 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv):
            merged.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            merged.append(argv[i])
            i += 1
    return merged


def cli_main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_merge_grid_token(list(argv)))
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return 1
    except MixedVarError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
