"""Command-line entry point: ``slide-ising <command> ...``.

Every command writes its outputs atomically plus a ``*.manifest.json`` that
records the resolved parameters, seed, output hashes and wall time. Exit
codes: 0 success, 2 invalid input, 3 runtime failure or budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .complexity import ComplexityProtocol, MaxNExceededError, empirical_sample_complexity, linear_fit
from .generators import BenchmarkModel, GraphGenerationError, Pattern
from .io import (FormatError, atomic_write, format_model, format_samples, ingest_with_config,
                 read_model, read_samples, read_slide_config, read_vote_config)
from .metrics import metrics_dict
from .model import MAX_EXACT_P, exact_distribution
from .sampling import gibbs_sample, sample_exact
from .solver import SlideConfig, fit
from .spectral import spectral_bipartition, spectral_layout

log = logging.getLogger("slide_ising")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class UsageError(ValueError):
    pass


def _sha256(data: str | bytes) -> str:
    return hashlib.sha256(data.encode() if isinstance(data, str) else data).hexdigest()


def _emit(outputs: dict, manifest_path, command: str, params: dict, seed, started: float) -> None:
    """Write ``{path: text}`` outputs, then the manifest describing them."""
    for path, text in outputs.items():
        atomic_write(path, text)
    manifest = {
        "command": command,
        "version": __version__,
        "params": params,
        "seed": seed,
        "artifacts": {str(p): _sha256(t) for p, t in outputs.items()},
        "wall_time_ms": int(round((time.perf_counter() - started) * 1000)),
    }
    atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest_for(out) -> Path:
    return Path(f"{out}.manifest.json")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- generate -----------------------------------------------------------------

def _model_from_args(args) -> BenchmarkModel:
    lam = args.lam if args.lam is not None else args.beta
    if args.rrg is not None:
        p, d = args.rrg
        return BenchmarkModel("rrg", args.pattern, args.beta, lam, seed=args.seed, p=p, d=d)
    return BenchmarkModel("pbsl", args.pattern, args.beta, lam, seed=args.seed, L=args.pbsl)


def cmd_generate(args) -> int:
    started = time.perf_counter()
    if args.beta <= 0 or (args.lam is not None and args.lam <= 0):
        raise UsageError("--beta and --lambda must be positive")
    model = _model_from_args(args)
    J = model.build()
    _emit({args.out: format_model(J)}, _manifest_for(args.out), "generate",
          {**model.as_dict(), "family": vars(J.family())}, args.seed, started)
    print(f"wrote {args.out}: p={J.p}, {len(J.edges())} edges")
    return EXIT_OK


# -- sample -------------------------------------------------------------------

def cmd_sample(args) -> int:
    started = time.perf_counter()
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.thin < 1 or (args.burn_in is not None and args.burn_in < 0):
        raise UsageError("--thin must be >= 1 and --burn-in >= 0")
    J = read_model(args.model)
    if args.exact:
        if J.p > MAX_EXACT_P:
            raise UsageError(f"--exact needs p <= {MAX_EXACT_P}, model has p={J.p}")
        data = sample_exact(exact_distribution(J), args.n, args.seed)
    else:
        data = gibbs_sample(J, args.n, args.burn_in, args.thin, args.seed)
    burn_in = args.burn_in if args.burn_in is not None else 100 * J.p
    _emit({args.out: format_samples(data)}, _manifest_for(args.out), "sample",
          {"model": str(args.model), "n": args.n, "exact": args.exact,
           "burn_in": None if args.exact else burn_in, "thin": None if args.exact else args.thin},
          args.seed, started)
    print(f"wrote {args.out}: n={data.n}, p={data.p}")
    return EXIT_OK


# -- reconstruct --------------------------------------------------------------

def _config_from_args(args) -> SlideConfig:
    # flags override the config file, which overrides the defaults
    kw = read_slide_config(args.config) if args.config else {}
    flags = {"d_max": args.dmax, "sigma_const": args.sigma_const, "s_max": args.s_max, "tau": args.tau,
             "lam": args.lam, "gamma": args.gamma, "threads": args.threads, "seed": args.seed}
    kw.update({k: v for k, v in flags.items() if v is not None})
    return SlideConfig(**kw)


def cmd_reconstruct(args) -> int:
    started = time.perf_counter()
    config = _config_from_args(args)
    data = read_samples(args.samples)
    if data.n < 3:
        raise UsageError(f"need at least 3 samples, {args.samples} has {data.n}")
    result = fit(data, config)
    trace_path = args.trace or f"{args.out}.trace.json"
    trace = result.trace()
    trace["d_max"] = config.resolved_d_max(data.n, data.p)
    params = {"samples": str(args.samples), **config.as_dict(), "tau_resolved": result.tau,
              "d_max_resolved": trace["d_max"], "cap_resolved": config.resolved_cap()}
    trace["config"].pop("threads")
    _emit({args.out: format_model(result.coupling), trace_path: _json(trace)},
          _manifest_for(args.out), "reconstruct", params, config.seed, started)
    print(f"wrote {args.out}: {len(result.coupling.edges())} edges (tau={result.tau:g})")
    return EXIT_OK


# -- evaluate -----------------------------------------------------------------

def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    est, true = read_model(args.estimate), read_model(args.truth)
    if est.p != true.p:
        raise UsageError(f"dimension mismatch: estimate p={est.p}, truth p={true.p}")
    text = _json(metrics_dict(est, true))
    if args.out:
        _emit({args.out: text}, _manifest_for(args.out), "evaluate",
              {"estimate": str(args.estimate), "truth": str(args.truth)}, None, started)
    sys.stdout.write(text)
    return EXIT_OK


# -- sweep --------------------------------------------------------------------

TRACE_FIELDS = ["axis", "value", "n", "success_rate", "trials", "successes", "passed"]
CELL_FIELDS = ["axis", "value", "x", "n_emp", "status"]


def _read_csv(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _csv_text(fields, rows) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _sweep_cells(args):
    """(value, model, x) per grid cell."""
    cells = []
    if args.axis == "degree":
        pattern = args.pattern or Pattern.DEGREE_DISENTANGLED
        if args.p is None or args.gamma is None or args.lam is None:
            raise UsageError("--axis degree needs --p, --gamma and --lambda")
        for d in args.degrees:
            if d < 2:
                raise UsageError("degree grid values must be >= 2")
            beta = (args.gamma - args.lam) / (d - 1)
            if beta <= 0:
                raise UsageError(f"gamma={args.gamma} leaves no room for beta at d={d}")
            model = BenchmarkModel("rrg", pattern, beta, args.lam, seed=args.model_seed, p=args.p, d=d)
            cells.append((d, model, float(d)))
    else:
        pattern = args.pattern or Pattern.FERRO
        if not args.betas:
            raise UsageError("--axis beta needs --betas")
        if args.rrg is None and args.pbsl is None:
            raise UsageError("--axis beta needs --rrg P D or --pbsl L")
        for b in args.betas:
            if b <= 0:
                raise UsageError("beta grid values must be positive")
            lam = args.lam if args.lam is not None else b
            if args.rrg is not None:
                model = BenchmarkModel("rrg", pattern, b, lam, seed=args.model_seed, p=args.rrg[0], d=args.rrg[1])
            else:
                model = BenchmarkModel("pbsl", pattern, b, lam, seed=args.model_seed, L=args.pbsl)
            cells.append((b, model, model.d * b))
    return cells


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    protocol = ComplexityProtocol(
        trials=args.trials, success_threshold=args.threshold, n_start=args.n_start,
        factor=args.factor, max_n=args.max_n, refine_tol=args.refine_tol,
        early_stop=not args.no_early_stop, sampler=args.sampler)
    base = SlideConfig(sigma_const=args.sigma_const, threads=args.threads, seed=args.seed)
    cells = _sweep_cells(args)
    for _, model, _ in cells:
        model.build()  # surface generation failures before any output is written

    out = Path(args.out_dir)
    trace_path, cells_path, summary_path = out / "trace.csv", out / "cells.csv", out / "summary.json"
    done = {r["value"]: r for r in _read_csv(cells_path) if r["axis"] == args.axis}
    trace_rows = [r for r in _read_csv(trace_path) if r["axis"] == args.axis and r["value"] in done]
    cell_rows = [done[k] for k in done]
    exceeded = False
    for value, model, x in cells:
        key = repr(value)
        if key in done:
            log.info("skipping completed cell %s=%s", args.axis, key)
            continue
        config = replace(base, d_max=model.d if args.known_degree else None,
                         lam=model.family.lam if args.known_lambda else None)
        try:
            res = empirical_sample_complexity(model, protocol, config, seed=args.seed)
            trace, n_emp, status = res.trace, res.n_emp, "ok"
        except MaxNExceededError as exc:
            trace, n_emp, status = exc.trace, "", "max_n_exceeded"
            exceeded = True
        trace_rows += [{"axis": args.axis, "value": key, "n": pt.n, "success_rate": f"{pt.success_rate:.6g}",
                        "trials": pt.trials, "successes": pt.successes, "passed": int(pt.passed)}
                       for pt in trace]
        cell_rows.append({"axis": args.axis, "value": key, "x": f"{x:.12g}", "n_emp": n_emp, "status": status})
        # checkpoint after every cell so an interrupted sweep can resume
        atomic_write(trace_path, _csv_text(TRACE_FIELDS, trace_rows))
        atomic_write(cells_path, _csv_text(CELL_FIELDS, cell_rows))
        print(f"{args.axis}={key}: n_emp={n_emp or 'exceeded'}", flush=True)

    order = {repr(v): k for k, (v, _, _) in enumerate(cells)}
    cell_rows.sort(key=lambda r: order.get(r["value"], len(order)))
    trace_rows.sort(key=lambda r: (order.get(r["value"], len(order))))
    ok = [r for r in cell_rows if r["status"] == "ok"]
    xs = [float(r["x"]) for r in ok]
    ys = [float(r["n_emp"]) for r in ok]
    summary = {"axis": args.axis, "protocol": protocol.as_dict(),
               "model": {k: v for k, v in cells[0][1].as_dict().items() if k not in ("beta", "d")},
               "cells": [{"value": r["value"], "x": float(r["x"]),
                          "n_emp": int(r["n_emp"]) if r["n_emp"] else None} for r in cell_rows]}
    if len(ok) >= 2:
        if args.axis == "degree":
            summary["fit"] = {"model": "n_emp = a + b*d", **linear_fit(xs, ys)}
        else:
            summary["fit"] = {"model": "ln(n_emp) = a + b*(d*beta)", **linear_fit(xs, np.log(ys))}
    params = {"axis": args.axis, "protocol": protocol.as_dict(), "known_degree": args.known_degree,
              "known_lambda": args.known_lambda, "cells": [repr(v) for v, _, _ in cells],
              "sigma_const": args.sigma_const}
    _emit({trace_path: _csv_text(TRACE_FIELDS, trace_rows), cells_path: _csv_text(CELL_FIELDS, cell_rows),
           summary_path: _json(summary)}, out / "manifest.json", "sweep", params, args.seed, started)
    if "fit" in summary:
        f = summary["fit"]
        print(f"fit: slope={f['slope']:.6g} intercept={f['intercept']:.6g} r2={f['r2']:.4f}")
    return EXIT_RUNTIME if exceeded else EXIT_OK


# -- ingest-votes / spectral --------------------------------------------------

def cmd_ingest_votes(args) -> int:
    started = time.perf_counter()
    cfg = read_vote_config(args.config)
    data = ingest_with_config(args.votes, cfg)
    _emit({args.out: format_samples(data)}, _manifest_for(args.out), "ingest-votes",
          {"votes": str(args.votes), "config": str(args.config), "missing_value": cfg.missing_value,
           "delimiter": cfg.delimiter, "header": cfg.header}, None, started)
    print(f"wrote {args.out}: n={data.n}, p={data.p}")
    return EXIT_OK


def cmd_spectral(args) -> int:
    started = time.perf_counter()
    J = read_model(args.model)
    xy = spectral_layout(J)
    labels = spectral_bipartition(J)
    rows = [{"node": i, "x": f"{xy[i, 0]:.12g}", "y": f"{xy[i, 1]:.12g}", "label": int(labels[i])}
            for i in range(J.p)]
    _emit({args.out: _csv_text(["node", "x", "y", "label"], rows)}, _manifest_for(args.out),
          "spectral", {"model": str(args.model)}, None, started)
    print(f"wrote {args.out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_topology(p, required=True, pattern=Pattern.FERRO_ONE_WEAK):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--rrg", nargs=2, type=int, metavar=("P", "D"), help="random D-regular graph on P nodes")
    g.add_argument("--pbsl", type=int, metavar="L", help="L x L periodic square lattice")
    p.add_argument("--pattern", type=Pattern, choices=list(Pattern), default=pattern,
                   metavar="{" + ",".join(x.value for x in Pattern) + "}")
    p.add_argument("--lambda", dest="lam", type=float, help="weakest coupling (default: beta)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slide-ising", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark coupling matrix")
    _add_topology(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="draw spins from a model file")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=None, help="Gibbs burn-in sweeps (default 100*p)")
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--exact", action="store_true", help=f"i.i.d. draws by enumeration (p <= {MAX_EXACT_P})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reconstruct", help="estimate couplings from a samples file")
    p.add_argument("samples")
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--tau", type=float, default=None, help="threshold (default lambda/2, else 0)")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="known minimum signal")
    p.add_argument("--gamma", type=float, default=None, help="known neighborhood weight (cap = 2*gamma)")
    p.add_argument("--sigma-const", type=float, default=None, help="splice threshold constant (default 0.01)")
    p.add_argument("--s-max", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value file of the same settings (flags win)")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None, help="per-node trace JSON (default <out>.trace.json)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="compare an estimate with the true model")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="empirical sample complexity across a degree or beta grid")
    p.add_argument("--axis", choices=["degree", "beta"], required=True)
    _add_topology(p, required=False, pattern=None)
    p.add_argument("--p", type=int, default=None, help="node count of the RRG (degree axis)")
    p.add_argument("--degrees", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--gamma", type=float, default=None, help="fixed neighborhood weight (degree axis)")
    p.add_argument("--betas", type=float, nargs="+", default=None)
    p.add_argument("--model-seed", type=int, default=0, help="graph generator seed")
    p.add_argument("--trials", type=int, default=45)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--n-start", type=int, default=100)
    p.add_argument("--factor", type=float, default=1.3)
    p.add_argument("--max-n", type=int, default=200_000)
    p.add_argument("--refine-tol", type=float, default=0.05)
    p.add_argument("--no-early-stop", action="store_true")
    p.add_argument("--sampler", choices=["auto", "exact", "gibbs"], default="auto")
    p.add_argument("--known-degree", action=argparse.BooleanOptionalAction, default=True,
                   help="set d_max to the model degree")
    p.add_argument("--known-lambda", action=argparse.BooleanOptionalAction, default=True,
                   help="threshold at half the model's minimum signal")
    p.add_argument("--sigma-const", type=float, default=0.01)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ingest-votes", help="convert a delimited vote table to a samples file")
    p.add_argument("votes")
    p.add_argument("--config", required=True, help="key=value token map file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_votes)

    p = sub.add_parser("spectral", help="eigenvector layout and bipartition of a model file")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectral)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FormatError, ValueError, FileNotFoundError) as exc:
        print(f"slide-ising {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (GraphGenerationError, MaxNExceededError, RuntimeError) as exc:
        print(f"slide-ising {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
