"""Command-line front end.

Subcommands: ``dist``, ``gf``, ``tail-prob``, ``cond-exp-bounds``, ``table1``
and ``simulate``. Exit status is 0 on success, 2 on invalid input and 3 when
a requested number is infinite (a divergent series).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .bounds import (ROW4_ALTERNATIVE, TABLE1, LambdaConfig, TableRow, cond_exp_bounds,
                     table_row_drop_last, tail_cond_exp_upper)
from .exact import ExactCapError, first_passage_seq, rencontre_sequence
from .model import ParameterError, from_config, new_walk_params
from .montecarlo import SimConfig, run_batch
from .polylog import DivergentSeries
from .series import no_rencontre_prob, varphi_series

SCHEMA_VERSION = "1"
OUTPUT_DIR_ENV = "RENCONTRE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIVERGENT = 3

_RATIONAL = re.compile(r"^\s*[+-]?\d+\s*/\s*\d+\s*$")


class UsageError(Exception):
    """Bad flag combination; the message names the flag."""


# -- serialisation --------------------------------------------------------------


def _fmt_float(x: float, digits: int) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in output document")
    s = f"{x:.{digits}g}"
    # keep a float marker so the value re-parses as a float
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_json(obj, digits: int = 17) -> str:
    """Deterministic JSON with floats at ``digits`` significant digits."""

    def enc(o, depth):
        pad = "  " * (depth + 1)
        end = "  " * depth
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o, digits)
        if isinstance(o, (Fraction, str)):
            return json.dumps(str(o))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, depth + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, depth + 1) for v in o) + "\n" + end + "]"
        if hasattr(o, "item"):  # numpy scalar
            return enc(o.item(), depth)
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(obj, 0) + "\n"


def to_csv(header: list[str], rows: list[list], digits: int = 17) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v, digits) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit(document: dict, fmt: str, output: str | None, command: str) -> None:
    """Write a document as JSON or CSV to ``output``, the default directory, or stdout.

    CSV documents carry ``header``/``rows`` (and optionally ``csv_digits``).
    """
    if fmt == "json":
        body = {"schema_version": SCHEMA_VERSION, **document.get("json", document)}
        text = to_json(body)
    else:
        if "rows" not in document:
            raise UsageError(f"--format csv is not available for {command}")
        text = to_csv(document["header"], document["rows"], document.get("csv_digits", 17))
    if output is None and os.environ.get(OUTPUT_DIR_ENV):
        output = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{command}.{fmt}")
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    try:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"--output: cannot write {output}: {exc.strerror}") from exc


# -- argument parsing -----------------------------------------------------------


def _prob_list(text: str) -> list[str]:
    parts = [s.strip() for s in text.split(",")]
    if not parts or any(not s for s in parts):
        raise argparse.ArgumentTypeError(f"malformed probability list {text!r}")
    for s in parts:
        try:
            Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"{s!r} is not a number") from None
    return parts


def _lambda(text: str) -> float:
    try:
        v = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"{text} must lie strictly between 0 and 1")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be at least 1")
    return v


def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} must lie in [0, 1]")
    return v


def _add_params(sp: argparse.ArgumentParser, formats=("json",)):
    sp.add_argument("--d", type=int, help="number of walks (defaults to the length of --p)")
    sp.add_argument("--p", type=_prob_list, help="comma-separated success probabilities")
    sp.add_argument("--config", help='JSON file with {"p": [...]}')
    sp.add_argument("--format", choices=formats, default=formats[0])
    sp.add_argument("--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rencontre", description="First rencontre times of Bernoulli walks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dist", help="r_n, f_n, cumulative mass and defect")
    _add_params(sp, ("csv", "json"))
    sp.add_argument("--n-max", type=_positive_int, required=True)
    sp.add_argument("--exact", action="store_true", help="exact rationals; --p must use a/b literals")

    sp = sub.add_parser("gf", help="generating function or a derivative at x")
    _add_params(sp)
    sp.add_argument("--x", type=_unit_interval, required=True)
    sp.add_argument("--order", type=int, choices=(0, 1, 2), default=0)
    sp.add_argument("--eps", type=float, default=1e-10)

    sp = sub.add_parser("tail-prob", help="probability of no rencontre")
    _add_params(sp)
    sp.add_argument("--eps", type=float, default=1e-10)

    sp = sub.add_parser("cond-exp-bounds", help="bracket for E(J | J < inf)")
    _add_params(sp)
    sp.add_argument("--lambda1", type=_lambda, required=True)
    sp.add_argument("--lambda2", type=_lambda, required=True)
    sp.add_argument("--t", type=float, help="also bound E(J | mu/t < J < inf)")
    sp.add_argument("--factor", type=int, choices=(1, 2), default=2, help="subtrahend factor for --t")

    sp = sub.add_parser("table1", help="reference table of conditional-mean brackets")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output")
    sp.add_argument("--five-as-d4", action="store_true",
                    help="evaluate the five-probability rows with the last probability dropped")
    sp.add_argument("--row4-alt", action="store_true",
                    help="evaluate row 4 at lambda1=1/50, lambda2=1/4")

    sp = sub.add_parser("simulate", help="Monte-Carlo estimate of the first-rencontre law")
    _add_params(sp, ("json", "csv"))
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--horizon", type=_positive_int, required=True)
    sp.add_argument("--reps", type=_positive_int, required=True)
    sp.add_argument("--workers", type=_positive_int, default=1)
    return ap


def _params(args, exact: bool = False):
    if args.config and args.p:
        raise UsageError("--config and --p are mutually exclusive")
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("p"), list):
            raise UsageError('--config: expected a JSON object with a "p" list')
        p = [str(x) for x in doc["p"]]
    elif args.p:
        p = args.p
    else:
        raise UsageError("--p (or --config) is required")
    if exact and not all(_RATIONAL.match(s) for s in p):
        raise UsageError("--exact requires rational literals such as 3/10 in --p")
    d = args.d if args.d is not None else len(p)
    if args.config:
        params = from_config({"p": p})
        if params.d != d:
            raise UsageError(f"--d {d} does not match the {params.d} probabilities in --config")
        return params
    return new_walk_params(d, p)


def _params_doc(params) -> dict:
    return {"d": params.d, "p": list(params.p)}


# -- subcommands ------------------------------------------------------------------


def _cmd_dist(args):
    params = _params(args, exact=args.exact)
    mode = "exact" if args.exact else "float"
    r = rencontre_sequence(params, args.n_max, mode)
    f = first_passage_seq(params, args.n_max, mode)
    rows = []
    for n in range(1, args.n_max + 1):
        cum = f.cumulative[n - 1]
        vals = [r.r[n - 1], f.f[n - 1], cum, 1 - cum]
        vals = [str(v) if mode == "exact" else float(v) for v in vals]
        rows.append([n, *vals])
    header = ["n", "r_n", "f_n", "cumulative", "defect"]
    return {
        "header": header,
        "rows": rows,
        "json": {"command": "dist", **_params_doc(params), "mode": mode,
                 "rows": [dict(zip(header, row)) for row in rows]},
    }


def _cmd_gf(args):
    params = _params(args)
    v = varphi_series(params, args.x, args.order, eps=args.eps)
    return {"command": "gf", **_params_doc(params), "x": args.x, "order": args.order,
            "value": v.value, "truncation_error": v.truncation_error, "terms_used": v.terms_used}


def _cmd_tail(args):
    params = _params(args)
    res = no_rencontre_prob(params, eps=args.eps)
    return {"command": "tail-prob", **_params_doc(params), **res.as_dict()}


def _cmd_bounds(args):
    params = _params(args)
    cfg = LambdaConfig(args.lambda1, args.lambda2)
    rep = cond_exp_bounds(params, cfg)
    doc = {"command": "cond-exp-bounds", **_params_doc(params),
           "lambda1": cfg.lambda1, "lambda2": cfg.lambda2, **rep.as_dict()}
    if args.t is not None:
        doc["t"] = args.t
        doc["subtrahend_factor"] = args.factor
        doc["tail_upper"] = tail_cond_exp_upper(params, args.t, cfg, args.factor)
    return doc


def _table_row(row: TableRow) -> list:
    rep = cond_exp_bounds(row.params, row.config)
    lo, hi = rep.lower_E, rep.upper_E
    diff = max(abs(lo - row.paper_lower), abs(hi - row.paper_upper))
    rel = max(abs(lo - row.paper_lower) / row.paper_lower, abs(hi - row.paper_upper) / row.paper_upper)
    label = f"d={row.params.d} p=({','.join(row.p)})"
    return [row.row, label, str(row.lambda1), str(row.lambda2), lo, hi,
            row.paper_lower, row.paper_upper, diff, rel, row.note]


def _cmd_table1(args):
    rows = []
    for row in TABLE1:
        if args.five_as_d4 and len(row.p) == 5:
            row = table_row_drop_last(row)
        if args.row4_alt and row.row == 4:
            row = TableRow(row.row, row.p, *ROW4_ALTERNATIVE, row.paper_lower, row.paper_upper,
                           row.printed_d, "evaluated at the alternative lambdas")
        rows.append(row)
    with ThreadPoolExecutor(min(len(rows), os.cpu_count() or 1)) as pool:
        out = list(pool.map(_table_row, rows))
    header = ["row", "params", "lambda1", "lambda2", "lower", "upper",
              "paper_lower", "paper_upper", "abs_diff", "rel_diff", "note"]
    return {
        "header": header,
        "rows": out,
        "csv_digits": 6,
        "json": {"command": "table1", "rows": [dict(zip(header, r)) for r in out]},
    }


def _cmd_simulate(args):
    params = _params(args)
    s = run_batch(params, SimConfig(args.seed, args.horizon, args.reps), workers=args.workers)
    rows = [[n, int(c)] for n, c in enumerate(s.histogram, start=1) if c]
    return {
        "header": ["n", "count"],
        "rows": rows,
        "json": {"command": "simulate", **_params_doc(params), **s.as_dict()},
    }


_COMMANDS = {
    "dist": _cmd_dist,
    "gf": _cmd_gf,
    "tail-prob": _cmd_tail,
    "cond-exp-bounds": _cmd_bounds,
    "table1": _cmd_table1,
    "simulate": _cmd_simulate,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        doc = _COMMANDS[args.command](args)
        emit(doc, args.format, args.output, args.command)
    except DivergentSeries as exc:
        print(f"rencontre {args.command}: divergent: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (UsageError, ParameterError, ExactCapError) as exc:
        print(f"rencontre {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
