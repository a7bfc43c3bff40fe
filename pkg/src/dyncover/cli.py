"""Command line: ``dyncover {run,gen,plot-data,verify}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .functions import verify_3increasing, verify_submodular
from .harness import MODES, run, series
from .traces import Trace, TraceError, function_from_json, gen_trace


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_run(a) -> int:
    try:
        trace = Trace.read(a.trace)
    except TraceError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    try:
        res = run(trace, a.mode, a.gamma, [a.audit], a.oracle, a.seed, a.fmin, a.fmax)
    except Exception as exc:  # surfaces fmin violations and non-termination with their messages
        print(f"run error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    _write(a.out, res.csv())
    summary = json.dumps(res.summary, indent=2, sort_keys=True, default=str)
    if a.summary:
        _write(a.summary, summary + "\n")
    elif a.out not in (None, "-"):
        _write(a.out.rsplit(".", 1)[0] + ".json", summary + "\n")
    else:
        print(summary, file=sys.stderr)
    return 0 if res.ok else 1


def cmd_gen(a) -> int:
    params = {}
    for key in ("n", "edges", "ops", "batch", "arity", "r", "items", "per", "points", "cost_spread"):
        v = getattr(a, key)
        if v is not None:
            params[key] = v
    if a.pattern:
        params["pattern"] = a.pattern
    _write(a.out, gen_trace(a.kind, a.seed, **params).dumps())
    return 0


def cmd_plot_data(a) -> int:
    with open(a.metrics) as fh:
        rows = list(csv.DictReader(fh))
    data = series(rows)
    _write(a.out, json.dumps(data, indent=1) + "\n")
    return 0


def cmd_verify(a) -> int:
    with open(a.function) as fh:
        text = fh.read()
    try:
        payloads = [json.loads(text)]
    except json.JSONDecodeError:
        trace = Trace.loads(text)
        payloads = [ev["function"] for ev in trace.events if ev.get("op") == "insert"]
    ok = True
    for k, d in enumerate(payloads):
        f = function_from_json(d)
        sub = verify_submodular(f)
        inc = verify_3increasing(f)
        ok &= sub
        print(f"function {k} ({d.get('kind')}): submodular={sub} 3-increasing={inc}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyncover", description="Fully-dynamic submodular cover experiments")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run an algorithm on a trace")
    r.add_argument("--trace", required=True)
    r.add_argument("--mode", choices=MODES, default="unit")
    r.add_argument("--gamma", default=None, help='"e", "e2" or a decimal')
    r.add_argument("--audit", choices=("tsallis", "h", "sqrt", "shannon", "all", "none"), default="all")
    r.add_argument("--oracle", choices=("none", "greedy", "brute"), default="none")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default="-", help="metrics CSV (default stdout)")
    r.add_argument("--summary", default=None, help="JSON summary path (default: next to --out)")
    r.add_argument("--fmin", default=None)
    r.add_argument("--fmax", default=None)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen", help="generate a seeded trace")
    g.add_argument("--kind", required=True, choices=("hvc", "coverage", "junta", "metric-mst", "metric-steiner"))
    g.add_argument("--seed", type=int, default=0)
    for key in ("n", "edges", "ops", "batch", "arity", "r", "items", "per", "points"):
        g.add_argument(f"--{key}", type=int, default=None)
    g.add_argument("--cost-spread", dest="cost_spread", type=int, default=None)
    g.add_argument("--pattern", choices=("random", "lifo"), default=None)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("plot-data", help="export (x, y) series from a metrics CSV")
    d.add_argument("--metrics", required=True)
    d.add_argument("--out", default="-")
    d.set_defaults(func=cmd_plot_data)

    v = sub.add_parser("verify", help="check submodularity and 3-increasingness of a function file")
    v.add_argument("--function", required=True, help="function JSON object or a trace file")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    return a.func(a)


if __name__ == "__main__":
    sys.exit(main())
