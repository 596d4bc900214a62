"""Command-line front end.

    cyclint quadratic --word "1,1"
    cyclint stream --preperiod "2,1" --periodic "1,1" --nmax 200
    cyclint stream --theorem1 "|1,1|n;|2,2|n" --nmax 12 --grouping words
    cyclint thue-morse --v "1,1" --w "2,2" --nmax 3
    cyclint levy --trials 100 --depth 500 --bits 2048 --seed 1 --format csv
    cyclint j-eval --z "0.3,0.7"

Exit status: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

from . import __version__
from .contour import DEFAULT_TOL, cycle_integrals
from .extended import accumulate_extended, theorem1_reference, thue_morse_estimates
from .levy import LevyBudgetError, levy_monte_carlo
from .modj import j_eval
from .quadrature import QuadratureError
from .words import (BUILTIN_SCHEDULES, EvenWord, WordError, periodic_stream, theorem1_stream,
                    thue_morse_identities)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

_NUM = {"type": ["number", "null"]}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["input", "n", "partial", "verdict", "val_re", "val_im", "diagnostics"],
    "properties": {
        "input": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "partial": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "sum_len", "val_hat_re", "val_hat_im", "one_hat_re", "one_hat_im", "eps_hat"],
                "properties": {
                    "n": {"type": "integer"}, "sum_len": {"type": "integer"},
                    "val_hat_re": _NUM, "val_hat_im": _NUM,
                    "one_hat_re": _NUM, "one_hat_im": _NUM, "eps_hat": _NUM,
                },
            },
        },
        "verdict": {"enum": ["converged", "bounded-oscillation", "undetermined"]},
        "val_re": _NUM,
        "val_im": _NUM,
        "diagnostics": {
            "type": "object",
            "required": ["max_pullback", "max_im_part"],
            "properties": {"max_pullback": _NUM, "max_im_part": _NUM},
        },
    },
}

CSV_COLUMNS = ["n", "sum_len", "val_hat_re", "val_hat_im", "one_hat", "eps_hat"]


class InputError(ValueError):
    pass


def fmt(x) -> Optional[float]:
    """Round to 15 significant digits; non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.15g}")


def _text(x) -> str:
    v = fmt(x)
    return "" if v is None else repr(v)


def _clean(obj):
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def parse_word(text: str, what: str = "word") -> EvenWord:
    try:
        return EvenWord.parse(text)
    except WordError as exc:
        raise InputError(f"{what} {text!r}: {exc}") from None


def parse_point(text: str, what: str = "--z") -> complex:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 2:
        raise InputError(f"{what} expects 'x,y', got {text!r}")
    vals = []
    for token in parts:
        try:
            vals.append(float(token))
        except ValueError:
            raise InputError(f"{what}: bad number {token!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what}: coordinates must be finite")
    if vals[1] <= 0:
        raise InputError(f"{what}: imaginary part {parts[1]!r} must be positive")
    return complex(vals[0], vals[1])


def parse_theorem1(text: str):
    """'V1|W1|sched;V2|W2|sched' with V possibly empty."""
    vs, ws, scheds = [], [], []
    for block in text.split(";"):
        fields = block.split("|")
        if len(fields) != 3:
            raise InputError(f"theorem1 block {block!r} must look like 'V|W|schedule'")
        v, w, s = fields
        vs.append(parse_word(v, "V"))
        ws.append(parse_word(w, "W"))
        s = s.strip()
        if s not in BUILTIN_SCHEDULES:
            raise InputError(f"unknown schedule {s!r}; choose from {', '.join(sorted(BUILTIN_SCHEDULES))}")
        scheds.append(s)
    return vs, ws, scheds


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CYCLINT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"CYCLINT_THREADS: bad value {env!r}") from None
    return 1


# ---------------------------------------------------------------------------
# subcommands return (json payload, csv rows, plot rows)

def cmd_quadratic(args):
    word = parse_word(args.word)
    if not word:
        raise InputError("word must be non-empty")
    ci = cycle_integrals(word, args.tol, args.z0)
    payload = {"input": str(word), **ci.as_dict()}
    payload["one_tilde_quadrature_re"] = ci.one_tilde_quadrature.real
    payload["error_estimate"] = ci.error_estimate
    keys = [k for k in payload if k not in ("input", "word", "w")]
    rows = [["key", "value"]] + [[k, _text(payload[k])] for k in keys]
    return payload, rows, [(0, ci.val.real)]


def _report_payload(report, extra=None):
    partial = [{
        "n": p.n, "sum_len": p.sum_len,
        "val_hat_re": p.val_hat.real, "val_hat_im": p.val_hat.imag,
        "one_hat_re": p.one_hat.real, "one_hat_im": p.one_hat.imag,
        "eps_hat": p.eps_hat,
    } for p in report.partial]
    val = report.val
    payload = {
        "input": report.input,
        "n": report.n,
        "grouping": report.grouping,
        "partial": partial,
        "estimates": {
            "val_hat_re": report.val_hat.real, "val_hat_im": report.val_hat.imag,
            "one_hat_re": report.one_hat.real, "one_hat_im": report.one_hat.imag,
            "eps_hat": report.eps_hat, "eps_hat_denominators": report.eps_hat_denominators,
        },
        "cauchy_width": report.cauchy_width,
        "verdict": report.verdict,
        "val_re": None if val is None else val.real,
        "val_im": None if val is None else val.imag,
        "diagnostics": dict(report.diagnostics),
    }
    if extra:
        payload.update(extra)
    rows = [CSV_COLUMNS] + [[str(p.n), str(p.sum_len), _text(p.val_hat.real), _text(p.val_hat.imag),
                             _text(p.one_hat.real), _text(p.eps_hat)] for p in report.partial]
    plot = [(p.sum_len, p.val_hat.real) for p in report.partial]
    return payload, rows, plot


def cmd_stream(args):
    extra = None
    if args.theorem1:
        if args.periodic or args.preperiod:
            raise InputError("--theorem1 cannot be combined with --preperiod/--periodic")
        vs, ws, scheds = parse_theorem1(args.theorem1)
        try:
            stream = theorem1_stream(vs, ws, scheds, bound=args.bound)
        except WordError as exc:
            raise InputError(str(exc)) from None
        ref = theorem1_reference(vs, ws, scheds, args.tol)
        extra = {"reference": {"val_hat_re": ref.val_hat.real, "val_hat_im": ref.val_hat.imag,
                               "one_hat": ref.one_hat, "val_re": ref.val.real, "val_im": ref.val.imag,
                               "weights": list(ref.weights)}}
    else:
        if not args.periodic:
            raise InputError("give --periodic (optionally with --preperiod) or --theorem1")
        pre = parse_word(args.preperiod or "", "preperiod")
        per = parse_word(args.periodic, "period")
        if not per:
            raise InputError("period must be non-empty")
        bad = [k for k in list(pre) + list(per) if k > args.bound]
        if bad:
            raise InputError(f"entry {bad[0]} exceeds the alphabet bound {args.bound}")
        stream = periodic_stream(pre, per, bound=args.bound)
    report = accumulate_extended(stream, args.nmax, args.tol, grouping=args.grouping, z0=args.z0,
                                 threads=_threads(args))
    return _report_payload(report, extra)


def cmd_thue_morse(args):
    v, w = parse_word(args.v, "--v"), parse_word(args.w, "--w")
    if not v or not w:
        raise InputError("V and W must be non-empty")
    records = thue_morse_estimates(v, w, args.nmax, args.tol)
    identities = []
    for n in range(1, 2 * args.nmax + 1):
        split_ok, mirror_ok = thue_morse_identities(v, w, n)
        identities.append({"n": n, "split": split_ok, "palindrome": mirror_ok})
    recs = [{
        "n": r.n, "pairs": r.pairs,
        "val_hat_re": r.val_hat.real, "val_hat_im": r.val_hat.imag,
        "one_hat": r.one_hat, "val_re": r.val.real, "val_im": r.val.imag,
        "gap_val_hat": r.gap_val_hat, "gap_one_hat": r.gap_one_hat,
    } for r in records]
    payload = {"input": f"V={v};W={w}", "records": recs, "identities": identities}
    cols = ["n", "pairs", "val_hat_re", "val_hat_im", "one_hat", "val_re", "val_im", "gap_val_hat", "gap_one_hat"]
    rows = [cols] + [[str(r["n"]), str(r["pairs"])] + [_text(r[c]) for c in cols[2:]] for r in recs]
    plot = [(r.n, r.one_hat) for r in records]
    return payload, rows, plot


def cmd_levy(args):
    try:
        res = levy_monte_carlo(args.trials, args.depth, args.bits, args.seed, _threads(args))
    except LevyBudgetError as exc:
        raise InputError(str(exc)) from None
    payload = {"input": f"trials={args.trials};depth={args.depth};bits={args.bits};seed={args.seed}",
               "mean": res.mean, "stderr": res.stderr, "statistics": list(res.statistics)}
    rows = [["trial", "statistic"]] + [[str(i + 1), _text(s)] for i, s in enumerate(res.statistics)]
    rows += [["mean", _text(res.mean)], ["stderr", _text(res.stderr)]]
    plot = list(enumerate(res.statistics, 1))
    return payload, rows, plot


def cmd_j_eval(args):
    z = parse_point(args.z)
    j = j_eval(z)
    payload = {"input": args.z, "z_re": z.real, "z_im": z.imag, "j_re": j.real, "j_im": j.imag}
    rows = [["z_re", "z_im", "j_re", "j_im"], [_text(z.real), _text(z.imag), _text(j.real), _text(j.imag)]]
    return payload, rows, [(j.real, j.imag)]


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    common.add_argument("--z0", default="0,1", help="base point 'x,y' (default i)")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--plot-data", help="also write two-column plot data to this path")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $CYCLINT_THREADS or 1)")

    parser = argparse.ArgumentParser(prog="cyclint", description="Cycle integrals of j and their extended limits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quadratic", parents=[common], help="classical values of a periodic word")
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_quadratic)

    p = sub.add_parser("stream", parents=[common], help="extended limits along a word stream")
    p.add_argument("--preperiod", default="")
    p.add_argument("--periodic")
    p.add_argument("--theorem1", help="'V1|W1|sched;V2|W2|sched', schedules n, sqrt, log")
    p.add_argument("--nmax", type=_positive_int, default=200)
    p.add_argument("--grouping", choices=["pairs", "words"], default="pairs")
    p.add_argument("--bound", type=_positive_int, default=20, help="alphabet bound")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("thue-morse", parents=[common], help="hat values of h^{2n}(V)")
    p.add_argument("--v", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--nmax", type=int, default=3)
    p.set_defaults(func=cmd_thue_morse)

    p = sub.add_parser("levy", parents=[common], help="Monte Carlo growth rate of denominators")
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--depth", type=_positive_int, default=500)
    p.add_argument("--bits", type=_positive_int, default=2048)
    p.set_defaults(func=cmd_levy)

    p = sub.add_parser("j-eval", parents=[common], help="evaluate j at a point")
    p.add_argument("--z", required=True)
    p.set_defaults(func=cmd_j_eval)
    return parser


def render(payload, rows, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        args.z0 = parse_point(args.z0, "--z0")
        if getattr(args, "nmax", 1) is not None and args.command == "thue-morse" and args.nmax < 0:
            raise InputError("--nmax must be >= 0")
        payload, rows, plot = args.func(args)
    except (InputError, WordError) as exc:
        print(f"cyclint: input error: {exc}", file=stderr)
        return EXIT_INPUT
    except (QuadratureError, ArithmeticError, MemoryError, RuntimeError) as exc:
        print(f"cyclint: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"cyclint: input error: {exc}", file=stderr)
        return EXIT_INPUT
    text = render(payload, rows, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            for x, y in plot:
                fh.write(f"{_text(x)} {_text(y)}\n")
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
