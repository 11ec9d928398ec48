"""Command-line front end: ``bmlab check | iso | repro | search``.

Exit codes: 0 certified to hold (or repro reproduced, or search finished),
3 inconclusive (or repro not reproduced), 4 certified violation, 1 usage,
input or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .checkers import HOLDS, INCONCLUSIVE, VIOLATION, falsify, flips, repro
from .checkers.repro import REPROS
from .gridset import EmptySet
from .means import parse_rational
from .specs import SpecError, load_experiment, run_experiment

EXIT_HOLDS = 0
EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 3
EXIT_VIOLATION = 4

STATUS_EXIT = {HOLDS: EXIT_HOLDS, VIOLATION: EXIT_VIOLATION, INCONCLUSIVE: EXIT_INCONCLUSIVE}

VERDICT_COLUMNS = ("pitch", "status", "lhs_lo", "lhs_hi", "rhs_lo", "rhs_hi", "margin_lo", "margin_hi",
                   "bracket_width", "gates_pass", "rigorous")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _verdict_csv(verdicts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERDICT_COLUMNS)
    for pitch, v in verdicts:
        w.writerow([pitch, v.status, repr(float(v.lhs.lower)), repr(float(v.lhs.upper)), repr(float(v.rhs.lower)),
                    repr(float(v.rhs.upper)), repr(float(v.hold_margin)), repr(float(-v.violation_margin)),
                    repr(float(v.bracket_width)), v.gates_pass, v.rigorous])
    return buf.getvalue()


def _run_spec(args, force_check=None) -> int:
    spec = load_experiment(args.spec) if force_check is None else _load_iso(args.spec, force_check)
    if args.pitch_refine < 0:
        raise UsageError("--pitch-refine must be non-negative")
    verdicts = []
    for level in range(args.pitch_refine + 1):
        v = run_experiment(spec, refine=2 ** level)
        pitch = str(parse_rational(spec.get("pitch", "1/8")) / 2 ** level)
        verdicts.append((pitch, v))
    lines = []
    for pitch, v in verdicts:
        lines.append(f"== pitch {pitch}")
        lines.append(v.report())
    for (p1, v1), (p2, v2) in zip(verdicts, verdicts[1:]):
        if flips(v1, v2):
            lines.append(f"WARNING: verdict flipped between pitch {p1} and {p2}")
    text = "\n".join(lines) + "\n"
    print(verdicts[-1][1].summary())
    if args.report:
        _write(args.report, text)
    if args.csv:
        _write(args.csv, _verdict_csv(verdicts))
    return STATUS_EXIT[verdicts[-1][1].status]


def _load_iso(path, check):
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError("experiment must be a JSON object")
    if spec.get("check") not in ("iso", "concavity"):
        spec = dict(spec, check=check)
    return spec


def _cmd_check(args) -> int:
    return _run_spec(args)


def _cmd_iso(args) -> int:
    return _run_spec(args, force_check="iso")


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _cmd_repro(args) -> int:
    if args.name not in REPROS:
        raise UsageError(f"unknown experiment {args.name!r}; known: {', '.join(sorted(REPROS))}")
    rep = repro(args.name, _parse_params(args.param))
    text = rep.text()
    sys.stdout.write(text)
    if args.report:
        _write(args.report, text)
    if args.csv:
        _write(args.csv, rep.csv_text())
    return EXIT_HOLDS if rep.reproduced else EXIT_INCONCLUSIVE


def _cmd_search(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be positive")
    if args.family == "wu_convex" and args.dim != 2:
        raise UsageError("the wu_convex family is planar")
    lambdas = [s for s in args.lam.split(",") if s.strip()]
    report = falsify(args.family, args.density, args.p, lambdas, args.trials, args.seed, args.workers, args.dim,
                     args.pitch, tuple(args.window.split(",")), args.general)
    text = report.csv_text()
    if args.csv:
        _write(args.csv, text)
        stem = Path(args.csv)
        for trial, witness in report.witnesses:
            path = stem.with_name(f"{stem.stem}.witness-{trial}.json")
            path.write_text(json.dumps(witness, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(report.summary(), file=sys.stderr)
    return EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bmlab", description="Certified checks of Brunn-Minkowski type inequalities.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    for name, fn, helptext in (("check", _cmd_check, "run an experiment spec"),
                               ("iso", _cmd_iso, "run an isoperimetric experiment spec")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("spec")
        p.add_argument("--pitch-refine", type=int, default=0, help="also run at pitch / 2, ..., pitch / 2^k")
        p.add_argument("--report", help="write the text report here ('-' for stdout)")
        p.add_argument("--csv", help="write one CSV row per pitch here")
        p.set_defaults(func=fn)
    p = sub.add_parser("repro", help="reproduce a registered experiment")
    p.add_argument("name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="override a parameter")
    p.add_argument("--report")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_repro)
    p = sub.add_parser("search", help="random search for violations")
    p.add_argument("--family", default="wu", choices=("any", "wu", "convex", "wu_convex", "box0"))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--density", default="gaussian",
                   choices=("gaussian", "lebesgue", "exp_decay", "nonproduct", "random_piecewise"))
    p.add_argument("--p", default="1/2")
    p.add_argument("--lambda", dest="lam", default="1/4,1/2,3/4")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default $BMLAB_WORKERS or 1)")
    p.add_argument("--pitch", default="1/16")
    p.add_argument("--window", default="-2,2", help="lo,hi of the sampling window on every axis")
    p.add_argument("--general", action="store_true", help="use the raw power combination")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"bmlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecError, EmptySet, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"bmlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
