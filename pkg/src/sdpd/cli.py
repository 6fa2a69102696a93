"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import McConfig, ase_row1, run_monte_carlo
from .errors import DataError, NumericalError
from .estimator import correlation_profile, estimate_from_covariances
from .io import load_model, read_panel_csv, write_panel_csv
from .moments import sample_covariances
from .process_sim import simulate
from .reduced_form import (
    build_reduced,
    check_representable,
    estimate_latent_w,
    read_transition_csv,
    sdpd_transition_estimator,
    var_yule_walker,
)
from .spatial_weights import read_weights_csv, write_weights_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _weights_arg(args, panel):
    if args.latent_w:
        return estimate_latent_w(panel)
    W = read_weights_csv(args.w)
    if W.p != panel.p:
        raise DataError(f"W has p={W.p} but the panel has {panel.p} columns")
    return W


def cmd_simulate(args) -> int:
    if args.model:
        model, desc = load_model(args.model, seed=args.seed)
    else:
        if args.w_kind is None or args.p is None:
            raise _UsageError("simulate needs --model or both --w-kind and --p")
        spec = {"W": {"kind": args.w_kind, "p": args.p, "seed": args.seed or 0},
                "error": {"cross_mode": args.cross_mode}, "seed": args.seed or 0}
        model, desc = load_model(spec)
    panel = simulate(model, args.T, args.burn_in)
    out = _outdir(args)
    write_panel_csv(panel, out / "panel.csv")
    write_weights_csv(model.W, out / "W.csv")
    desc["W"] = {"path": "W.csv", "normalization": model.W.normalization.value}
    (out / "model.json").write_text(json.dumps(desc, indent=2))
    print(f"wrote {out / 'panel.csv'} (T={panel.T}, p={panel.p})")
    return EXIT_OK


def cmd_estimate(args) -> int:
    panel = read_panel_csv(args.panel)
    cov = sample_covariances(panel)
    W = _weights_arg(args, panel)
    res = estimate_from_covariances(cov, W)
    out = _outdir(args)
    if args.format == "csv":
        res.to_csv(out / "result.csv")
    else:
        res.to_json(out / "result.json")
    if args.latent_w:
        write_weights_csv(W, out / "W_hat.csv")
    print(f"estimated p={res.p} locations, {res.n_degenerate} flagged")
    return EXIT_OK


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise _UsageError(f"--grid must look like lo:hi:n, got {text!r}") from None


def cmd_profile(args) -> int:
    panel = read_panel_csv(args.panel)
    W = _weights_arg(args, panel)
    i = args.location - 1
    if not 0 <= i < panel.p:
        raise DataError(f"location {args.location} outside 1..{panel.p}")
    prof = correlation_profile(sample_covariances(panel), W, i, _grid(args.grid))
    out = _outdir(args)
    with open(out / "profile.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point", "lambda0", "lambda1"])
        for kind, x, y in prof.rows():
            w.writerow([kind, repr(x), repr(y)])
    print(f"selected (lambda0, lambda1) = ({prof.selected[0]:.6g}, {prof.selected[1]:.6g})")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = McConfig.from_json(args.config)
    out = _outdir(args)
    overrides = {"summary_csv": cfg.summary_csv or str(out / "summary.csv"),
                 "raw_csv": cfg.raw_csv or str(out / "raw.csv")}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.fixed_lambda:
        overrides["fixed_lambda"] = True
    summary = run_monte_carlo(replace(cfg, **overrides))
    for name, m in summary.metrics.items():
        why = summary.note(name)
        note = f" ({why})" if why else ""
        print(f"{name:26s} mean={m.mean:.6g} sd={m.sd:.6g} n_fail={m.n_fail}{note}")
    return EXIT_OK


def cmd_reduced(args) -> int:
    out = _outdir(args)
    if args.model:
        model, _ = load_model(args.model, seed=args.seed)
        A = build_reduced(model.W, model.lambda0, model.lambda1)
    else:
        if args.panel is None:
            raise _UsageError("reduced needs --model or --panel")
        panel = read_panel_csv(args.panel)
        if args.method == "var":
            A = var_yule_walker(panel)
        elif args.method == "latent_w":
            A, _, _ = sdpd_transition_estimator(panel, None)
        else:
            if not args.w:
                raise _UsageError("--method known_w needs --w")
            A, _, _ = sdpd_transition_estimator(panel, read_weights_csv(args.w))
    A.to_csv(out / "transition.csv")
    print(f"wrote {out / 'transition.csv'} ({A.provenance.value})")
    if args.truth:
        print(f"ase_row1 {ase_row1(A, read_transition_csv(args.truth)):.6g}")
    if args.check:
        rep = check_representable(A)
        print(f"diagonalizable={rep.diagonalizable} eigen_real={rep.eigen_real} distinct={rep.distinct}")
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=".")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--threads", type=int, default=None)

    parser = _Parser(prog="sdpd", description="Stationary SDPD simulation and estimation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="simulate a panel from a model spec")
    p.add_argument("--model", help="JSON model descriptor")
    p.add_argument("--w-kind", choices=("W1", "W2", "W3"))
    p.add_argument("--p", type=int)
    p.add_argument("--cross-mode", choices=("independent", "common_factor"), default="common_factor")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=200)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("estimate", cmd_estimate, "estimate lambda0/lambda1 per location"),
                                 ("profile", cmd_profile, "slope profile of one location")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--panel", required=True)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--w")
        g.add_argument("--latent-w", action="store_true")
        if name == "profile":
            p.add_argument("--location", type=int, required=True, help="1-based location index")
            p.add_argument("--grid", default="-3:3:601", help="lo:hi:n")
        p.set_defaults(func=func)

    p = sub.add_parser("benchmark", parents=[common], help="run a Monte Carlo study")
    p.add_argument("--config", required=True)
    p.add_argument("--fixed-lambda", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("reduced", parents=[common], help="build or estimate a transition matrix")
    p.add_argument("--model", help="JSON model descriptor (true A*)")
    p.add_argument("--panel")
    p.add_argument("--w")
    p.add_argument("--method", choices=("known_w", "latent_w", "var"), default="known_w")
    p.add_argument("--truth", help="transition CSV to compare the first row against")
    p.add_argument("--check", action="store_true", help="report representability")
    p.set_defaults(func=cmd_reduced)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"sdpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"sdpd: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError, ValueError) as exc:
        print(f"sdpd: data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
