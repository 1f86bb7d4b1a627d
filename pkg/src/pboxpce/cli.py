"""Command-line interface: batch experiment runner and p-box comparison.

``run`` executes a JSON experiment config with replications and writes, per
replication, a bound-CDF table (CSV: y,F_lower,F_upper) and a metrics JSON,
plus an aggregate summary.  All emitted files are a pure function of
(config, seed); timing information goes to stdout only.

``compare`` reads two saved CDF tables and prints area/KS metrics as JSON.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from .cdfs import SteppedCDF
from .config import load_config
from .errors import ParseFailure, PboxError
from .metrics import ks_distance, pbox_area
from .propagation import (
    ResponsePBox,
    convert_sample_propagate,
    reference_propagate,
    slice_propagate,
    two_level_propagate,
)

_FMT = "{:.17g}"


def write_cdf_table(path, response):
    """Write bound CDFs to CSV on the union grid of their breakpoints."""
    grid = np.union1d(response.lower.xs, response.upper.xs)
    fl = np.asarray(response.lower.evaluate(grid))
    fu = np.asarray(response.upper.evaluate(grid))
    with open(path, "w") as fh:
        fh.write("y,F_lower,F_upper\n")
        for y, a, b in zip(grid, fl, fu):
            fh.write(f"{_FMT.format(y)},{_FMT.format(a)},{_FMT.format(b)}\n")


def read_cdf_table(path):
    """Read a bound-CDF CSV back into a ResponsePBox."""
    if not os.path.exists(path):
        raise ParseFailure(f"no such CDF table: {path}")
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (OSError, ValueError) as exc:
        raise ParseFailure(f"cannot parse CDF table {path}: {exc}") from exc
    names = data.dtype.names
    if names is None or tuple(names) != ("y", "F_lower", "F_upper"):
        raise ParseFailure(
            f"{path}: expected columns y,F_lower,F_upper, got {names}"
        )
    y = np.atleast_1d(data["y"])
    lower = SteppedCDF(y, np.atleast_1d(data["F_lower"]))
    upper = SteppedCDF(y, np.atleast_1d(data["F_upper"]))
    return ResponsePBox(lower, upper, {"method": "loaded", "path": str(path)})


def _execute(cfg, rep_seed):
    """Run one replication of the configured method."""
    model = cfg.build_model()
    pboxes = cfg.build_inputs()
    prop = dataclasses.replace(cfg.propagation, seed=rep_seed)
    opt = dataclasses.replace(cfg.optimizer, seed=rep_seed)
    diagnostics = {}
    if cfg.method == "slicing":
        resp = slice_propagate(
            model, pboxes, prop.n_slices, opt, cap=prop.slice_cap, seed=rep_seed
        )
    elif cfg.method == "conversion":
        monotone = prop.monotone
        if monotone is None:
            monotone = model.fully_monotone
        resp = convert_sample_propagate(
            model,
            pboxes,
            prop.n_pred,
            sampler=prop.sampler,
            opt_cfg=opt,
            seed=rep_seed,
            monotone=monotone,
        )
    elif cfg.method == "reference":
        resp = reference_propagate(
            model, pboxes, prop.n_pred, opt_cfg=opt, seed=rep_seed,
            monotone=prop.monotone,
        )
    elif cfg.method == "two_level":
        resp, diagnostics = two_level_propagate(model, pboxes, prop, opt)
    else:  # pragma: no cover - blocked by config validation
        raise PboxError(f"unknown method {cfg.method!r}")
    return resp, model.eval_count, diagnostics


def _rep_metrics(resp, true_evals):
    metrics = {
        "area": pbox_area(resp),
        "true_model_evals": int(true_evals),
        "provenance": resp.provenance,
    }
    return metrics


def run_experiment(cfg, out_dir=None, base_seed=None, replications=None):
    """Execute all replications; returns (summary dict, artifact paths)."""
    out_dir = out_dir or cfg.output_dir
    base_seed = cfg.seed if base_seed is None else base_seed
    reps = cfg.replications if replications is None else replications
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    entries = []
    for r in range(reps):
        t0 = time.perf_counter()
        resp, true_evals, _ = _execute(cfg, base_seed + r)
        elapsed = time.perf_counter() - t0
        csv_path = os.path.join(out_dir, f"{cfg.name}_rep{r}.csv")
        json_path = os.path.join(out_dir, f"{cfg.name}_rep{r}.json")
        write_cdf_table(csv_path, resp)
        metrics = _rep_metrics(resp, true_evals)
        with open(json_path, "w") as fh:
            json.dump(metrics, fh, sort_keys=True, indent=1)
            fh.write("\n")
        paths += [csv_path, json_path]
        entries.append(metrics)
        print(
            f"replication {r}: seed={base_seed + r} area={metrics['area']:.6g} "
            f"evals={true_evals} ({elapsed:.2f} s)",
            flush=True,
        )
    areas = np.array([e["area"] for e in entries])
    summary = {
        "name": cfg.name,
        "method": cfg.method,
        "replications": reps,
        "base_seed": int(base_seed),
        "area_median": float(np.median(areas)),
        "area_iqr": [
            float(np.percentile(areas, 25)),
            float(np.percentile(areas, 75)),
        ],
        "entries": entries,
    }
    for key in ("err_gen_first", "err_gen_lower", "err_gen_upper"):
        vals = [e["provenance"][key] for e in entries if key in e["provenance"]]
        if vals:
            summary[f"{key}_median"] = float(np.median(vals))
    summary_path = os.path.join(out_dir, f"{cfg.name}_summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
    paths.append(summary_path)
    return summary, paths


def _cmd_run(args):
    cfg = load_config(args.config)
    summary, paths = run_experiment(
        cfg,
        out_dir=args.out,
        base_seed=args.seed,
        replications=args.replications,
    )
    print(f"wrote {len(paths)} files to {args.out or cfg.output_dir}")
    return 0


def _cmd_compare(args):
    ref = read_cdf_table(args.reference)
    app = read_cdf_table(args.approx)
    cmp_ = ks_distance(ref, app)
    print(json.dumps(cmp_.as_dict(), sort_keys=True, indent=1))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pboxpce",
        description="Propagate probability-boxes through computational models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--seed", type=int, default=None, help="base seed override")
    p_run.add_argument(
        "--replications", type=int, default=None, help="replication count override"
    )
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="compare two saved CDF tables")
    p_cmp.add_argument("reference", help="reference CDF table CSV")
    p_cmp.add_argument("approx", help="approximate CDF table CSV")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PboxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
