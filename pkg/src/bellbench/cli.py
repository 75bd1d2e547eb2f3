"""Command-line front end.

Every subcommand prints one JSON report envelope on stdout (or a CSV table
with ``--out csv`` where the result is tabular); diagnostics go to stderr.

Exit status: 0 success, 1 certification failed, 2 usage or parse error,
3 capacity or budget exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from bellbench import __version__
from bellbench.analysis import (
    example4_settings,
    identify_ghz,
    optimize_angles,
    robustness_analysis,
    theorem1_settings,
    werner_decay_curve,
)
from bellbench.bell import TSIRELSON, build_bell, verify_square_identity
from bellbench.classical import LHV_MAX_PARTIES, NOTE_POLYTOPE, facet_check, lhv_max
from bellbench.errors import BellbenchError, ValidationError
from bellbench.observables import MeasurementSettings, PartySetting, norm_bound_check

PARTY_FIELDS = ("theta", "phi", "theta_prime", "phi_prime")
NOTE_MIXTURE = "mixture weights are restricted to the probability simplex (sum of eps_j <= 1)"


def load_settings(path: str, degrees: bool = False) -> MeasurementSettings:
    """Parse a settings file: ``{"n": N, "parties": [{theta, phi, theta_prime, phi_prime}, ...]}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read settings file: {exc.strerror}") from None
    return parse_settings(text, source=path, degrees=degrees)


def parse_settings(text: str, source: str = "<settings>", degrees: bool = False) -> MeasurementSettings:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: top level must be an object")
    unknown = sorted(set(data) - {"n", "parties"})
    if unknown:
        raise ValidationError(f"{source}: unknown field(s) {', '.join(unknown)}")
    for key in ("n", "parties"):
        if key not in data:
            raise ValidationError(f"{source}: missing field '{key}'")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError(f"{source}: field 'n' must be an integer")
    parties = data["parties"]
    if not isinstance(parties, list):
        raise ValidationError(f"{source}: field 'parties' must be an array")
    if len(parties) != n:
        raise ValidationError(f"{source}: field 'parties' has {len(parties)} entries but n = {n}")
    scale = math.pi / 180 if degrees else 1.0
    out = []
    for k, entry in enumerate(parties):
        where = f"{source}: parties[{k}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where} must be an object")
        extra = sorted(set(entry) - set(PARTY_FIELDS))
        if extra:
            raise ValidationError(f"{where}: unknown field(s) {', '.join(extra)}")
        values = []
        for name in PARTY_FIELDS:
            if name not in entry:
                raise ValidationError(f"{where}: missing field '{name}'")
            v = entry[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{where}.{name}: expected a finite number, got {v!r}")
            values.append(float(v) * scale)
        out.append(PartySetting(*values))
    return MeasurementSettings(tuple(out))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def envelope(command: str, inputs: dict, results, seed=None, notes=()) -> str:
    body = {
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "results": results,
        "notes": list(notes),
        "tool_version": __version__,
    }
    return json.dumps(body, indent=2, allow_nan=False, default=_json_default)


def csv_table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v + 0.0:.15g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _parties(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 parties, got {n}")
    return n


def _at_least(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return parse


def _add_source(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--settings", metavar="FILE", help="JSON settings file (angles in radians)")
    group.add_argument("--theorem1", action="store_true", help="GHZ identification settings for --n parties")
    group.add_argument("--example4", action="store_true", help="four-qubit settings with a degenerate top eigenvalue")
    p.add_argument("--degrees", action="store_true", help="angles in the settings file are degrees")


def _resolve_source(args, parser) -> tuple[MeasurementSettings, dict]:
    if args.example4:
        if args.n is not None and args.n != 4:
            parser.error("--example4 fixes n = 4")
        return example4_settings(), {"source": "example4", "n": 4}
    if args.settings:
        s = load_settings(args.settings, degrees=args.degrees)
        if args.n is not None and args.n != s.n:
            raise ValidationError(f"{args.settings}: file describes n = {s.n} but --n {args.n} was given")
        return s, {"source": "file", "path": args.settings, "degrees": args.degrees, "settings": s.as_dict()}
    if args.n is None:
        parser.error("--n is required with --theorem1")
    return theorem1_settings(args.n), {"source": "theorem1", "n": args.n}


def cmd_bound(args, parser) -> int:
    s, inputs = _resolve_source(args, parser)
    op = build_bell(s)
    norms = norm_bound_check(s)
    spec = op.spectrum()
    lhv = lhv_max(s.n).as_dict() if s.n <= LHV_MAX_PARTIES else None
    results = {
        "n": s.n,
        "operator_norm": op.operator_norm,
        "tsirelson_bound": TSIRELSON,
        "top_eigenvalue": spec.top,
        "top_multiplicity": spec.top_multiplicity,
        "square_identity_residual": verify_square_identity(op),
        **norms.as_dict(),
        "lhv": lhv,
        "classical_bound": None if lhv is None else lhv["max"],
    }
    print(envelope("bound", inputs, results))
    return 0


def cmd_facet(args, parser) -> int:
    res = facet_check(args.n)
    print(envelope("facet", {"n": args.n}, res.as_dict(), notes=[NOTE_POLYTOPE]))
    return 0


def cmd_identify(args, parser) -> int:
    rep = identify_ghz(args.n)
    print(envelope("identify", {"n": args.n}, rep.as_dict()))
    return 0 if rep.certified else 1


def cmd_sweep(args, parser) -> int:
    k = args.theta_steps
    rows = []
    for i in range(k):
        vt = (math.pi / 4) * i / (k - 1)
        opt = optimize_angles(args.n, vt, restarts=args.restarts, seed=args.seed + i)
        analytic = TSIRELSON * math.sin(2 * vt)
        rows.append((vt, analytic, opt.best_value, abs(opt.best_value - analytic)))
    header = ("vartheta", "analytic", "optimized", "abs_difference")
    if args.out == "csv":
        sys.stdout.write(csv_table(header, rows))
        return 0
    inputs = {"n": args.n, "theta_steps": k, "restarts": args.restarts}
    results = {
        "columns": list(header),
        "rows": [list(r) for r in rows],
        "max_abs_difference": max(r[3] for r in rows),
        "point_seeds": "seed + row index",
    }
    print(envelope("sweep", inputs, results, seed=args.seed))
    return 0


def cmd_robust(args, parser) -> int:
    s, inputs = _resolve_source(args, parser)
    inputs["samples"] = args.samples
    rep = robustness_analysis(s, samples=args.samples, seed=args.seed)
    print(envelope("robust", inputs, rep.as_dict(), seed=args.seed, notes=[NOTE_MIXTURE]))
    return 0


def cmd_werner(args, parser) -> int:
    if args.settings or args.example4:
        s, inputs = _resolve_source(args, parser)
    else:
        if args.n is None:
            parser.error("--n is required")
        s, inputs = theorem1_settings(args.n), {"source": "theorem1", "n": args.n}
    k = args.eps_steps
    grid = [i / (k - 1) for i in range(k)]
    curve = werner_decay_curve(s.n, s, grid)
    header = ("eps", "value")
    if args.out == "csv":
        sys.stdout.write(csv_table(header, curve))
        return 0
    inputs["eps_steps"] = k
    results = {"columns": list(header), "rows": [list(r) for r in curve]}
    print(envelope("werner", inputs, results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("bound", help="quantum and classical bounds of the Bell operator")
    p.add_argument("--n", type=_parties)
    _add_source(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("facet", help="check that the inequality is a facet of the correlation polytope")
    p.add_argument("--n", type=_parties, required=True)
    p.set_defaults(func=cmd_facet)

    p = sub.add_parser("identify", help="certify GHZ identification by a non-degenerate maximum")
    p.add_argument("--n", type=_parties, required=True)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("sweep", help="optimized vs analytic maximal violation over vartheta in [0, pi/4]")
    p.add_argument("--n", type=_parties, required=True)
    p.add_argument("--theta-steps", type=_at_least(2), default=16)
    p.add_argument("--restarts", type=_at_least(1), default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("robust", help="sample states in the degenerate top eigenspace")
    p.add_argument("--n", type=_parties)
    _add_source(p)
    p.add_argument("--samples", type=_at_least(0), default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_robust)

    p = sub.add_parser("werner", help="Bell value of GHZ mixed with white noise")
    p.add_argument("--n", type=_parties)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--settings", metavar="FILE")
    group.add_argument("--example4", action="store_true")
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--eps-steps", type=_at_least(2), default=101)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_werner, theorem1=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except BellbenchError as exc:
        print(f"bellbench {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
