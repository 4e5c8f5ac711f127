"""Command line interface.

Subcommands:

  build   generate a dataset + instance pair and write them to disk
  run     run one or more solvers on a problem and write traces + summary
  fit     fit decay slopes to an existing trace CSV
  bounds  estimate the rate-certificate constants for a problem

Configuration precedence for ``run``: built-in defaults, then the --config
JSON file, then explicit command line flags. The output directory can
additionally be forced by the AIRIG_OUT_DIR environment variable, which wins
over all of the above (useful for redirecting batch jobs without touching
their configs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io as aio
from .baselines import BASELINE_KINDS, run_baseline
from .problem import ProblemSpec, estimate_bounds
from .qp import PolyhedralSet
from .rates import fit_rates, infeasibility_bound, suboptimality_bound
from .schedules import ScheduleParams
from .solver import RunHistory, run_airig
from .svm import (
    PRESETS,
    build_instance,
    build_preset,
    generate_data,
    preset_config,
    reference_optimum,
)

__all__ = ["main", "run_suite", "resolve_config", "DEFAULTS", "ENV_OUT_DIR"]

ENV_OUT_DIR = "AIRIG_OUT_DIR"

DEFAULTS: dict = {
    "problem": "paper-fig1",
    "problem_opts": {},
    "solvers": ["airig"],
    "iters": 2000,
    "budget_s": None,
    "gamma0": None,   # None means: take the preset's value, else 1.0
    "eta0": None,
    "b": None,
    "r": None,
    "eval_every": 1,
    "seed": 0,
    "tol": 1e-8,
    "out_dir": "runs",
    "workers": 1,
    "bound_samples": 256,
    "window_fraction": 0.5,
    "reference": False,
    "f_star": None,
}

_SCHEDULE_FALLBACK = {"gamma0": 1.0, "eta0": 1.0, "b": 0.25, "r": 0.0}


def resolve_config(file_cfg: dict | None, flag_cfg: dict | None) -> dict:
    """defaults <- config file <- flags <- AIRIG_OUT_DIR (out_dir only)."""
    cfg = dict(DEFAULTS)
    for layer in (file_cfg or {}, flag_cfg or {}):
        for key, val in layer.items():
            if key not in DEFAULTS:
                raise KeyError(f"unknown config key {key!r}")
            if val is not None:
                cfg[key] = val
    env_dir = os.environ.get(ENV_OUT_DIR)
    if env_dir:
        cfg["out_dir"] = env_dir
    if isinstance(cfg["solvers"], str):
        cfg["solvers"] = [s.strip() for s in cfg["solvers"].split(",") if s.strip()]
    return cfg


def _resolve_problem(cfg: dict):
    """Returns (problem, feasible_poly, instance_or_None, source_desc)."""
    name = cfg["problem"]
    if name in PRESETS:
        inst, params, preset_cfg = build_preset(name, **cfg["problem_opts"])
        # explicit schedule settings beat the preset's
        for key in _SCHEDULE_FALLBACK:
            if cfg[key] is None:
                cfg[key] = preset_cfg[key]
        return inst.problem, inst.feasible_with_box(), inst, f"preset:{name}"
    path = Path(name)
    if not path.exists():
        raise FileNotFoundError(f"problem {name!r} is neither a preset nor a file")
    data = aio.load_json(path)
    if "problem" in data:
        inst = aio.load_instance(path)
        return inst.problem, inst.feasible_with_box(), inst, str(path)
    problem = aio.problem_from_dict(data)
    return problem, _feasible_from_specs(problem), None, str(path)


def _feasible_from_specs(problem: ProblemSpec) -> PolyhedralSet | None:
    """Assemble the feasible polyhedron from serialized oracle specs: affine
    h families become inequality rows, equalities and the nonnegativity list
    come over directly, box rows close the set. Returns None when some h is
    not polyhedral (projected baselines then cannot run)."""
    n = problem.n
    C_rows, d_vals = [], []
    for blk in problem.blocks:
        spec = blk.h_spec or {}
        fam = spec.get("family")
        if fam in ("hinge-max", "hinge-sum"):
            G = np.atleast_2d(np.asarray(spec["G"], dtype=float))
            g0 = np.asarray(spec["g0"], dtype=float).ravel()
            C_rows.append(G)
            d_vals.append(-g0)
        elif fam == "affine":
            C_rows.append(np.asarray(spec["c"], dtype=float)[None, :])
            d_vals.append(np.array([-float(spec.get("c0", 0.0))]))
        else:
            return None
    for j in problem.J:
        row = np.zeros((1, n))
        row[0, j] = -1.0
        C_rows.append(row)
        d_vals.append(np.zeros(1))
    eye = np.eye(n)
    C_rows.extend([eye, -eye])
    d_vals.extend([problem.box.upper, -problem.box.lower])
    E, e = problem.equality_system()
    return PolyhedralSet(
        C=np.vstack(C_rows), d=np.concatenate(d_vals),
        E=E if E.shape[0] else None, e=e if E.shape[0] else None, dim=n,
    )


def _run_one(solver: str, problem, feasible, params, cfg) -> RunHistory:
    if solver == "airig":
        return run_airig(
            problem, params, n_iters=cfg["iters"], budget_s=cfg["budget_s"],
            eval_every=cfg["eval_every"],
        )
    if solver in BASELINE_KINDS:
        if feasible is None:
            raise ValueError(f"{solver} needs a polyhedral feasible set, none available")
        return run_baseline(
            solver, problem, feasible, n_iters=cfg["iters"],
            budget_s=cfg["budget_s"], gamma0=cfg["gamma0"],
            eval_every=cfg["eval_every"], seed=cfg["seed"], tol=cfg["tol"],
        )
    raise ValueError(f"unknown solver {solver!r}")


def run_suite(config: dict) -> tuple[dict, int]:
    """Run every configured solver on the configured problem.

    Writes one trace CSV per run plus a summary.json into out_dir; individual
    run failures are recorded in the summary and reflected in a nonzero exit
    code, but do not stop the remaining runs.
    """
    cfg = resolve_config(config, None)
    problem, feasible, instance, source = _resolve_problem(cfg)
    for key, fallback in _SCHEDULE_FALLBACK.items():
        if cfg[key] is None:
            cfg[key] = fallback
    params = ScheduleParams(cfg["gamma0"], cfg["eta0"], cfg["b"], cfg["r"])
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    bounds = estimate_bounds(problem, samples=cfg["bound_samples"], seed=cfg["seed"])
    f_star = cfg["f_star"]
    if f_star is None and cfg["reference"] and instance is not None:
        _, f_star, _ = reference_optimum(instance, tol=cfg["tol"])

    solvers = list(cfg["solvers"])
    if not solvers:
        raise ValueError("no solvers configured")

    def job(solver: str) -> dict:
        entry: dict = {"solver": solver, "error": None}
        try:
            hist = _run_one(solver, problem, feasible, params, cfg)
            trace = out_dir / f"trace_{solver}.csv"
            aio.write_trace(hist.records, trace)
            final = hist.records[-1]
            entry.update(
                trace=trace.name,
                iterations=hist.iterations,
                passes=hist.passes,
                truncated=hist.truncated,
                stepsize=hist.stepsize,
                final=asdict(final),
            )
            try:
                report = fit_rates(
                    hist, f_star, window_fraction=cfg["window_fraction"],
                    bounds=bounds if solver == "airig" else None,
                )
                entry["rates"] = report.to_dict()
            except ValueError as exc:
                entry["rates"] = None
                entry["rates_note"] = str(exc)
        except Exception as exc:  # noqa: BLE001 - suite must keep going
            entry["error"] = f"{type(exc).__name__}: {exc}"
            entry["traceback"] = traceback.format_exc()
        return entry

    if cfg["workers"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
            runs = list(pool.map(job, solvers))
    else:
        runs = [job(s) for s in solvers]

    summary = {
        "config": {k: v for k, v in cfg.items()},
        "problem": {"source": source, "n": problem.n, "m": problem.m},
        "bounds": {"C": bounds.C, "C_f": bounds.C_f, "M": bounds.M, "M_f": bounds.M_f},
        "f_star": f_star,
        "runs": runs,
    }
    aio.save_json(summary, out_dir / "summary.json")
    exit_code = 0 if all(r["error"] is None for r in runs) else 1
    return summary, exit_code


# argument parsing


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", help="preset name or problem/instance JSON path")
    p.add_argument("--solvers", help="comma list from: airig,proj_ig,prox_iag,saga")
    p.add_argument("--iters", type=int, help="outer iteration cap")
    p.add_argument("--budget-s", type=float, dest="budget_s", help="wall clock budget per run")
    p.add_argument("--gamma0", type=float)
    p.add_argument("--eta0", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--eval-every", type=int, dest="eval_every")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--workers", type=int)
    p.add_argument("--bound-samples", type=int, dest="bound_samples")
    p.add_argument("--window-fraction", type=float, dest="window_fraction")
    p.add_argument("--reference", action="store_const", const=True, default=None,
                   help="solve the reference QP for f*")
    p.add_argument("--f-star", type=float, dest="f_star")
    p.add_argument("--samples", type=int, dest="_n_samples",
                   help="preset override: number of data points")
    p.add_argument("--dim", type=int, dest="_n_features",
                   help="preset override: feature dimension")
    p.add_argument("--agents", type=int, dest="_agents", help="preset override")
    p.add_argument("--lam", type=float, dest="_lam", help="preset override")


def _flags_to_cfg(args: argparse.Namespace) -> dict:
    cfg = {
        k: getattr(args, k)
        for k in DEFAULTS
        if hasattr(args, k) and getattr(args, k) is not None
    }
    opts = {}
    for flag, key in (("_n_samples", "n_samples"), ("_n_features", "n_features"),
                      ("_agents", "agents"), ("_lam", "lam")):
        val = getattr(args, flag, None)
        if val is not None:
            opts[key] = val
    if opts:
        cfg["problem_opts"] = opts
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="airig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="generate dataset + instance files")
    p_build.add_argument("--preset", default="paper-fig1")
    p_build.add_argument("--samples", type=int, help="override preset sample count")
    p_build.add_argument("--dim", type=int, help="override preset feature count")
    p_build.add_argument("--agents", type=int)
    p_build.add_argument("--lam", type=float)
    p_build.add_argument("--seed", type=int)
    p_build.add_argument("--separation", type=float)
    p_build.add_argument("--flip-prob", type=float, dest="flip_prob")
    p_build.add_argument("--out-dir", dest="out_dir", default="data")

    p_run = sub.add_parser("run", help="run solvers, write traces + summary")
    p_run.add_argument("--config", help="JSON config file")
    _add_run_flags(p_run)

    p_fit = sub.add_parser("fit", help="fit decay slopes to a trace CSV")
    p_fit.add_argument("--trace", required=True)
    p_fit.add_argument("--f-star", type=float, dest="f_star")
    p_fit.add_argument("--window-fraction", type=float, dest="window_fraction", default=0.5)
    p_fit.add_argument("--min-used", type=int, dest="min_used", default=50)

    p_bounds = sub.add_parser("bounds", help="estimate rate-certificate constants")
    p_bounds.add_argument("--problem", required=True)
    p_bounds.add_argument("--samples", type=int, default=256)
    p_bounds.add_argument("--seed", type=int, default=0)
    p_bounds.add_argument("--gamma0", type=float, default=1.0)
    p_bounds.add_argument("--eta0", type=float, default=1.0)
    p_bounds.add_argument("--b", type=float, default=0.25)
    p_bounds.add_argument("--r", type=float, default=0.0)
    p_bounds.add_argument("--at", help="comma list of N values to evaluate ceilings at")

    args = parser.parse_args(argv)
    if args.command == "build":
        return _cmd_build(args)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "fit":
        return _cmd_fit(args)
    if args.command == "bounds":
        return _cmd_bounds(args)
    parser.error("unknown command")
    return 2


def _cmd_build(args) -> int:
    cfg = preset_config(args.preset)
    for flag, key in (("samples", "n_samples"), ("dim", "n_features"),
                      ("agents", "agents"), ("lam", "lam"), ("seed", "seed"),
                      ("separation", "separation"), ("flip_prob", "flip_prob")):
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val
    ds = generate_data(cfg["n_samples"], cfg["n_features"], seed=cfg["seed"],
                       separation=cfg["separation"], flip_prob=cfg["flip_prob"])
    inst = build_instance(ds, m=cfg["agents"], lam=cfg["lam"])
    out = Path(os.environ.get(ENV_OUT_DIR) or args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds_path = out / "dataset.csv"
    inst_path = out / "instance.json"
    aio.save_dataset(ds, ds_path)
    aio.save_instance(inst, inst_path, meta={"preset": args.preset, "seed": cfg["seed"]})
    print(json.dumps({"dataset": str(ds_path), "instance": str(inst_path)}, indent=2))
    return 0


def _cmd_run(args) -> int:
    file_cfg = aio.load_json(args.config) if args.config else None
    cfg = resolve_config(file_cfg, _flags_to_cfg(args))
    summary, code = run_suite(cfg)
    for run in summary["runs"]:
        if run["error"] is not None:
            print(f"[fail] {run['solver']}: {run['error']}")
        else:
            fin = run["final"]
            print(
                f"[ ok ] {run['solver']}: k={fin['k']} passes={run['passes']:.1f} "
                f"f_bar={fin['f_bar']:.6g} phi_bar={fin['phi_bar']:.3e}"
                + (" (budget hit)" if run["truncated"] else "")
            )
    print(f"summary: {Path(summary['config']['out_dir']) / 'summary.json'}")
    return code


def _cmd_fit(args) -> int:
    records = aio.read_trace(args.trace)
    hist = RunHistory(
        solver="trace", records=records, x_last=np.zeros(0), xbar=np.zeros(0),
        iterations=records[-1].k if records else 0, passes=0.0,
    )
    try:
        report = fit_rates(hist, args.f_star, window_fraction=args.window_fraction,
                           min_used=args.min_used)
    except ValueError as exc:
        # typical cause: the trace reached exact feasibility and the log fit
        # has nothing left in the window; point at the knobs that widen it
        print(f"error: {exc}", file=sys.stderr)
        print("hint: try --window-fraction 1.0 or a smaller --min-used",
              file=sys.stderr)
        return 2
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_bounds(args) -> int:
    cfg = resolve_config(None, {"problem": args.problem, "bound_samples": args.samples,
                                "seed": args.seed, "gamma0": args.gamma0,
                                "eta0": args.eta0, "b": args.b, "r": args.r})
    problem, _, _, source = _resolve_problem(cfg)
    bounds = estimate_bounds(problem, samples=args.samples, seed=args.seed)
    params = ScheduleParams(cfg["gamma0"] or 1.0, cfg["eta0"] or 1.0,
                            cfg["b"] or 0.25, cfg["r"] if cfg["r"] is not None else 0.0)
    out = {
        "problem": source,
        "m": problem.m,
        "n": problem.n,
        "C": bounds.C, "C_f": bounds.C_f, "M": bounds.M, "M_f": bounds.M_f,
    }
    if args.at:
        ns = [int(s) for s in args.at.split(",") if s.strip()]
        out["ceilings"] = {
            str(n): {
                "suboptimality": suboptimality_bound(params, bounds, problem.m, n),
                "infeasibility": infeasibility_bound(params, bounds, problem.m, n),
            }
            for n in ns
        }
    print(json.dumps(out, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
