"""Command line entry point ``boxembed``.

Usage::

    boxembed <experiment> [--m LIST] [--n LIST] [--delta LIST] [--tf sym|nderiv|dirac]
                          [--alpha F] [--snap] [--precondition] [--radius R]
                          [--harmonics LIST] [--curve PATH] [--config PATH] [--out PATH]
                          [--seed N] [--no-timing]
    boxembed verify [--tolerance-factor F] [--only LIST] [--seed N]

Experiments: integral, dirichlet, neumann, kernels, precondition, delta-sweep.
For ``integral`` the ``--n`` list holds the line-quadrature resolutions.

``integral --curve PATH`` integrates ``u = cos(x1)`` over a user domain instead
of the radius-2 disk; the reference value is a boundary integral obtained from
the divergence theorem.  The file holds
one sample per row, ``t, y1, y2`` (commas or blanks, ``#`` comments), with
``t_j = 2 pi j / n`` equispaced on ``[0, 2 pi)``; either orientation is accepted.

A config file holds ``key = value`` lines using the long option names
(``m = 128,256``); command line flags take precedence.  Exit codes: 0 success,
1 numerical failure (or a failed acceptance criterion), 2 usage error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import acceptance
from .experiments import EXPERIMENTS, UsageError, config_for, run, to_csv

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _list(conv):
    def parse(text: str):
        text = text.strip()
        if not text:
            return []
        try:
            return [conv(tok) for tok in text.split(",") if tok.strip() != ""]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from None

    return parse


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


_CONVERTERS = {
    "m": _list(int),
    "n": _list(int),
    "delta": _list(float),
    "harmonics": _list(int),
    "tf": str,
    "alpha": float,
    "radius": float,
    "seed": int,
    "snap": _bool,
    "precondition": _bool,
    "timing": _bool,
    "out": str,
    "curve": str,
}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file (``#`` starts a comment)."""
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "no_timing":
                key, val = "timing", str(not _bool(val))
            if key not in _CONVERTERS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONVERTERS[key](val)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boxembed", description="Periodic-box embedding experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        e = sub.add_parser(name, help=f"run the {name} experiment")
        e.add_argument("--m", type=_CONVERTERS["m"], help="grid sizes, e.g. 128,256")
        e.add_argument("--n", type=_CONVERTERS["n"], help="boundary point counts")
        e.add_argument("--delta", type=_CONVERTERS["delta"], help="offset distances")
        e.add_argument("--tf", choices=["sym", "nderiv", "dirac"], help="test function kind")
        e.add_argument("--alpha", type=float, help="test function sharpness (default 4m)")
        e.add_argument("--snap", action="store_const", const=True, help="snap source centres to grid nodes")
        e.add_argument("--precondition", action="store_const", const=True, help="precondition with the rough kernel")
        e.add_argument("--radius", type=float, help="disk radius (default 2)")
        e.add_argument("--harmonics", type=_CONVERTERS["harmonics"], help="kernel-function indices")
        e.add_argument("--curve", help="boundary file 't, y1, y2' (integral experiment only)")
        e.add_argument("--config", help="key=value file with defaults for these options")
        e.add_argument("--out", help="CSV output path (default stdout)")
        e.add_argument("--seed", type=int, help="random seed")
        e.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                       help="leave wall_ms empty so output is byte-stable")
    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--tolerance-factor", type=float, default=1.0,
                   help="widen all tolerances by this factor; failures become warnings")
    v.add_argument("--only", type=_list(int), help="subset of criterion numbers")
    v.add_argument("--seed", type=int, default=0)
    return p


def _run_experiment(args) -> int:
    settings = read_config(args.config) if args.config else {}
    for key in _CONVERTERS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    out = settings.pop("out", None)
    cfg = config_for(args.command, **{k: v for k, v in settings.items()})
    rows = run(cfg)
    text = to_csv(rows)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _verify(args) -> int:
    if not args.tolerance_factor >= 1.0:
        raise UsageError("--tolerance-factor must be >= 1")
    only = set(args.only) if args.only else None
    if only and not only <= set(acceptance.CRITERIA):
        raise UsageError(f"unknown criteria {sorted(only - set(acceptance.CRITERIA))}")
    results = acceptance.run_all(args.tolerance_factor, only, echo=lambda s: print(s, flush=True), seed=args.seed)
    failed = [r for r in results if r.status == "FAIL"]
    warned = [r for r in results if r.status == "WARN"]
    print(f"{len(results) - len(failed) - len(warned)} passed, {len(warned)} warnings, {len(failed)} failed")
    return EXIT_NUMERICAL if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        if args.command == "verify":
            return _verify(args)
        return _run_experiment(args)
    except UsageError as exc:
        print(f"boxembed: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"boxembed: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"boxembed: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
