"""Command-line front end: golden-constant tables, convergence studies,
approximation-rate experiments, and body inspection.

Subcommands
-----------
constants   computed sharp constants against closed forms, with deviations
converge    constants along an a-sweep against the limiting value
remez       measured exponential-approximation error against the rate bound
inspect     lattice / cover / polar listings for a body

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.  Output is
deterministic for a fixed configuration and seed; CSV uses 12 significant
digits, JSON uses stable key order.  NEWTON_LAB_JOBS overrides --jobs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .approx import RateBoundError, best_approx_exp, rate_constants
from .bodies import ConvexBody, CoverageError, cover_with_parallelepipeds, \
    lattice_points
from .constants import convergence_study, markov_m, tilde_m
from .polycore import DiffOperator, bernstein_product_constant, \
    labelle_constant, mu


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _parse_p(text):
    if text == "inf":
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise ConfigError("--p", f"not a number: {text!r}")
    if not p > 0:
        raise ConfigError("--p", "must be positive (or 'inf')")
    return p


def _parse_range(text, field, integer=False):
    """Parse 'lo..hi[:step]' or a single value into an increasing list."""
    step = 1.0
    body = text
    if ":" in text:
        body, step_s = text.split(":", 1)
        try:
            step = float(step_s)
        except ValueError:
            raise ConfigError(field, f"bad step: {step_s!r}")
        if step <= 0:
            raise ConfigError(field, "step must be positive")
    try:
        if ".." in body:
            lo_s, hi_s = body.split("..", 1)
            lo, hi = float(lo_s), float(hi_s)
        else:
            lo = hi = float(body)
    except ValueError:
        raise ConfigError(field, f"bad range: {text!r}")
    if hi < lo:
        raise ConfigError(field, "empty range (hi < lo)")
    vals = []
    v = lo
    while v <= hi * (1 + 1e-12):
        vals.append(round(v, 12))
        v += step
    if not vals:
        raise ConfigError(field, "empty range")
    if integer:
        ivals = [int(round(v)) for v in vals]
        if any(abs(v - i) > 1e-9 for v, i in zip(vals, ivals)):
            raise ConfigError(field, "integer range required")
        return ivals
    return vals


def _parse_sigma(text, m):
    parts = [s for s in text.split(",") if s]
    try:
        vals = [float(s) for s in parts]
    except ValueError:
        raise ConfigError("--sigma", f"bad list: {text!r}")
    if len(vals) == 1:
        vals = vals * m
    if len(vals) != m:
        raise ConfigError("--sigma", f"need {m} entries, got {len(vals)}")
    if any(v <= 0 for v in vals):
        raise ConfigError("--sigma", "entries must be positive")
    return tuple(vals)


BODY_LAMBDAS = {"cube": math.inf, "box": math.inf, "ball": 2.0,
                "octahedron": 1.0}


def _build_body(args):
    m = args.m
    if not 1 <= m <= 4:
        raise ConfigError("--m", "dimension must lie in [1, 4]")
    sigma = _parse_sigma(args.sigma, m) if args.sigma else (1.0,) * m
    if getattr(args, "body_lambda", None) is not None:
        lam = math.inf if args.body_lambda == "inf" else float(args.body_lambda)
        if not lam >= 1:
            raise ConfigError("--body-lambda", "must lie in [1, inf]")
        return ConvexBody(m, lam, sigma)
    return ConvexBody(m, BODY_LAMBDAS[args.body], sigma)


def _build_operator(args, m):
    alpha = None
    if getattr(args, "alpha", None):
        try:
            alpha = tuple(int(s) for s in args.alpha.split(","))
        except ValueError:
            raise ConfigError("--alpha", f"bad list: {args.alpha!r}")
        if len(alpha) != m:
            raise ConfigError("--alpha", f"need {m} entries")
        if any(a < 0 for a in alpha):
            raise ConfigError("--alpha", "orders must be nonnegative")
    N = args.N
    if N is not None and N < 0:
        raise ConfigError("--N", "order must be nonnegative")
    if alpha is not None:
        if N is not None and N != sum(alpha):
            raise ConfigError("--N", "inconsistent with --alpha")
        return DiffOperator.partial(alpha)
    N = N or 0
    if N == 0:
        return DiffOperator.identity(m)
    if m == 1:
        return DiffOperator.d_dx(N)
    raise ConfigError("--alpha", "required for m > 1 with N > 0")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def _emit_table(rows, columns, args, summary):
    """Write the table (csv or json) to --out or stdout; print the summary."""
    if args.format == "csv":
        lines = [",".join(columns)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(c)) for c in columns))
        text = "\n".join(lines) + "\n"
    else:
        doc = {"rows": rows, "summary": summary}
        text = json.dumps(doc, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def _reference_for(p, D, body, n):
    """Closed-form comparison value when one applies, else None."""
    one_term = len(D.terms) == 1
    if one_term:
        (alpha, b), = D.terms.items()
        if abs(b - 1.0) > 1e-15:
            one_term = False
    if body.m == 1 and math.isinf(body.lam) and body.sigma == (1.0,) \
            and one_term and float(n).is_integer():
        if math.isinf(p):
            return mu(D.order, int(n))
        if p == 2:
            return labelle_constant(D.order, int(n))
    if math.isinf(p) and math.isinf(body.lam) and one_term:
        (alpha, _), = D.terms.items()
        try:
            return bernstein_product_constant(alpha, float(n), body.sigma)
        except ValueError:
            return None
    return None


def cmd_constants(args):
    body = _build_body(args)
    D = _build_operator(args, args.m)
    p = _parse_p(args.p)
    ns = _parse_range(args.n, "--n", integer=True)
    rows = []
    failed = False
    for n in ns:
        if args.dual:
            res = markov_m(p, D, n, body, seed=args.seed)
        else:
            res = tilde_m(p, D, float(n), body, seed=args.seed)
        ref = _reference_for(p, D, body, n)
        row = {"n": n, "computed": res.value, "reference": ref,
               "abs_dev": None, "rel_dev": None}
        if ref is not None:
            row["abs_dev"] = abs(res.value - ref)
            row["rel_dev"] = abs(res.value - ref) / abs(ref)
        rows.append(row)
        failed = failed or not res.converged
    summary = {"command": "constants", "seed": args.seed,
               "max_rel_dev": max((r["rel_dev"] for r in rows
                                   if r["rel_dev"] is not None), default=None)}
    _emit_table(rows, ["n", "computed", "reference", "abs_dev", "rel_dev"],
                args, summary)
    return 3 if failed else 0


def cmd_converge(args):
    body = _build_body(args)
    D = _build_operator(args, args.m)
    p = _parse_p(args.p)
    a_values = _parse_range(args.a, "--a")
    if a_values[0] < 1:
        raise ConfigError("--a", "values must be >= 1")
    jobs = int(os.environ.get("NEWTON_LAB_JOBS", args.jobs))
    study = convergence_study(p, D, body, a_values, jobs=jobs)
    rows = study.rows
    failed = any(not r["converged"] for r in rows)
    summary = dict(study.summary())
    summary.update({"command": "converge", "seed": args.seed})
    _emit_table(rows, ["a", "tilde_m", "e_value", "rel_gap"], args, summary)
    return 3 if failed else 0


def cmd_remez(args):
    if not 0 < args.tau < 1:
        raise ConfigError("--tau", "must lie in (0, 1)")
    if args.lam == 0:
        raise ConfigError("--lambda", "must be nonzero")
    a_values = _parse_range(args.a, "--a")
    if a_values[0] < 1:
        raise ConfigError("--a", "values must be >= 1")
    rc = rate_constants(args.tau)
    rows = []
    failed = False
    for a in a_values:
        try:
            res = best_approx_exp(args.lam, a, args.tau)
            measured, bound = res.measured_error, res.bound
        except RateBoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        ratio = measured / bound
        failed = failed or ratio > 1.0
        rows.append({"a": a, "measured_error": measured, "bound": bound,
                     "ratio": ratio})
    summary = {"command": "remez", "seed": args.seed, "tau": args.tau,
               "C1": rc.C1, "C2": rc.C2,
               "max_ratio": max(r["ratio"] for r in rows)}
    _emit_table(rows, ["a", "measured_error", "bound", "ratio"], args, summary)
    return 3 if failed else 0


def cmd_inspect(args):
    body = _build_body(args)
    if args.what == "lattice":
        if args.a is None or args.a < 0:
            raise ConfigError("--a", "nonnegative scale required")
        pts = lattice_points(body, args.a,
                             nonnegative_only=not args.signed)
        doc = {"what": "lattice", "count": len(pts),
               "points": [list(p) for p in pts],
               "body": body.descriptor(), "a": args.a}
    elif args.what == "polar":
        doc = {"what": "polar", "body": body.descriptor(),
               "polar": body.polar().descriptor()}
    else:  # cover
        if args.delta is None or args.delta <= 1:
            raise ConfigError("--delta", "inflation factor > 1 required")
        try:
            cover = cover_with_parallelepipeds(
                body, args.delta, sample_count=args.samples, seed=args.seed)
        except CoverageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        check = body.sample_points(args.samples, seed=args.seed + 1)
        covered = np.zeros(len(check), dtype=bool)
        for piece in cover.pieces:
            covered |= piece.contains_many(check)
        doc = {"what": "cover", "pieces": [list(p.u) for p in cover.pieces],
               "piece_count": len(cover.pieces),
               "min_half_width": cover.min_half_width,
               "coverage_fraction": float(covered.mean()),
               "delta": args.delta, "body": body.descriptor(),
               "seed": args.seed}
    text = json.dumps(doc, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_common(sp, with_body=True):
    sp.add_argument("--out", default=None, help="write the table here")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    if with_body:
        sp.add_argument("--m", type=int, default=1, help="dimension (1..4)")
        sp.add_argument("--body", choices=tuple(BODY_LAMBDAS), default="cube")
        sp.add_argument("--body-lambda", default=None,
                        help="override the body exponent (1..inf)")
        sp.add_argument("--sigma", default=None, help="semi-axes, comma list")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="newton-lab",
        description="Sharp constants for Newton-polyhedron polynomial classes")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="golden-constant comparison table")
    _add_common(sp)
    sp.add_argument("--p", default="inf")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--alpha", default=None, help="operator orders, comma list")
    sp.add_argument("--n", required=True, help="degree range lo..hi[:step]")
    sp.add_argument("--dual", action="store_true",
                    help="use the polar-domain constant")
    sp.set_defaults(fn=cmd_constants)

    sp = sub.add_parser("converge", help="a-sweep against the limit constant")
    _add_common(sp)
    sp.add_argument("--p", default="2")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--a", required=True, help="scale range lo..hi[:step]")
    sp.set_defaults(fn=cmd_converge)

    sp = sub.add_parser("remez", help="exponential approximation rate sweep")
    _add_common(sp, with_body=False)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--a", required=True, help="scale range lo..hi[:step]")
    sp.set_defaults(fn=cmd_remez)

    sp = sub.add_parser("inspect", help="lattice / cover / polar listings")
    what = sp.add_subparsers(dest="what", required=True)
    for name in ("lattice", "cover", "polar"):
        w = what.add_parser(name)
        _add_common(w)
        w.add_argument("--a", type=float, default=None)
        w.add_argument("--signed", action="store_true",
                       help="all integer points, not only nonnegative")
        w.add_argument("--delta", type=float, default=None)
        w.add_argument("--samples", type=int, default=10_000)
        w.set_defaults(fn=cmd_inspect)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RateBoundError, CoverageError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
