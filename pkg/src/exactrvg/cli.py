"""Command-line harness.

    exactrvg generate --dist exponential --param s=1 --spec cdf --count 3 --seed 7
    exactrvg bench --dist exponential:s=15 --dist geometric:p=0.4 --count 1000000
    exactrvg range --dist exponential --dist flat
    exactrvg coverage --E 11 --m 52 --l 53
    exactrvg coverage --empirical --format float:E=5,m=2 --count 10000000
    exactrvg quantile --dist exponential --q 1
    exactrvg validate --dist parity

Exit codes: 0 ok, 1 usage, 2 validation failure, 3 spec violation while generating.
"""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import distlib
from .bitops import F32, F64, ProbConfig
from .dist_spec import (SpecViolation, ValidationError, coverage_density, quantile,
                        quantile_ddf, support_codes, validate)
from .entropy import PrngSource
from .formats import FormatError, FormatSpec, Kind, parse_format
from .generators import sample

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ descriptors

def parse_params(text: str | None) -> dict:
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        key, eq, val = item.partition("=")
        if not eq or not key.strip():
            raise UsageError(f"bad parameter {item!r}; expected key=value")
        out[key.strip()] = val.strip()
    return out


def parse_dist(text: str, extra: str | None = None) -> tuple[str, dict]:
    """``name`` or ``name:k=v,k=v``; ``extra`` (from --param) is merged on top."""
    name, _, rest = text.partition(":")
    params = parse_params(rest)
    params.update(parse_params(extra))
    return name.strip().lower(), params


def _prob(name: str) -> ProbConfig:
    try:
        return {"f32": F32, "f64": F64}[name]
    except KeyError:
        raise UsageError(f"--prob must be f32 or f64, not {name!r}") from None


def _fmt(desc: str | None):
    return parse_format(desc) if desc else None


def make_spec(args, dist: str, spec: str, check: bool = True):
    name, params = parse_dist(dist, getattr(args, "param", None))
    if name not in ("uniform", "parity"):
        params = {k: float(v) for k, v in params.items()}
    return distlib.named_spec(name, params, spec, _fmt(args.format), _prob(args.prob), check)


# ------------------------------------------------------------------ output helpers

def format_value(fmt: FormatSpec, code: int) -> str:
    """Shortest round-trip decimal for the value of ``code``."""
    v = fmt.value(code)
    if not v.is_finite:
        return {"-inf": "-inf", "+inf": "inf", "bottom": "nan"}[v.tag]
    if fmt.kind is Kind.FLOAT and (fmt.E, fmt.m) == (8, 23):
        return str(np.float32(fmt.to_float(code)))
    if fmt.kind in (Kind.UINT, Kind.TWOS, Kind.SIGN_MAG):
        return str(int(v.value))
    return repr(float(v))


def format_code(fmt: FormatSpec, code: int) -> str:
    return "0x" + format(code, f"0{(fmt.width + 3) // 4}x")


@contextmanager
def _sink(path: str | None):
    if path and path != "-":
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


# ------------------------------------------------------------------ commands

def cmd_generate(args) -> int:
    spec = make_spec(args, args.dist, args.spec)
    src = PrngSource(args.seed)
    batch = sample(spec, src, args.count, args.method)
    fmt = spec.fmt
    with _sink(args.output) as out:
        if args.json:
            rows = [{"value": format_value(fmt, int(c)), "code": format_code(fmt, int(c)), "flips": int(f)}
                    for c, f in zip(batch.codes, batch.flips)]
            json.dump({"spec": spec.name, "format": str(fmt), "seed": args.seed, "method": args.method,
                       "total_flips": batch.total_flips, "variates": rows}, out, indent=1)
            out.write("\n")
        else:
            for c in batch.codes:
                out.write(f"{format_value(fmt, int(c))} {format_code(fmt, int(c))}\n")
    return EXIT_OK


BENCH_COLUMNS = ["dist", "spec", "method", "count", "bits_per_variate", "variates_per_sec", "seed"]


def bench_cell(spec, method: str, count: int, seed: int, repeats: int = 5) -> dict:
    """Bits/variate from the seeded run; variates/sec as the median of ``repeats`` timed runs."""
    sample(spec, PrngSource(seed), min(count, 10_000), method)  # warmup (and compile)
    times = []
    total = None
    for _ in range(repeats):
        src = PrngSource(seed)
        t0 = time.perf_counter()
        batch = sample(spec, src, count, method)
        times.append(time.perf_counter() - t0)
        total = batch.total_flips
    return {"count": count, "total_bits": total, "bits_per_variate": total / count,
            "variates_per_sec": count / statistics.median(times), "compiled": batch.compiled}


def cmd_bench(args) -> int:
    dists = args.dist or ["exponential"]
    if dists == ["all"]:
        dists = distlib.catalog()
    records = []
    cell = 0
    for dist in dists:
        for spec_kind in args.spec.split(","):
            spec = make_spec(args, dist, spec_kind)
            for method in args.method.split(","):
                seed = args.seed + cell
                r = bench_cell(spec, method, args.count, seed, args.repeats)
                name, params = parse_dist(dist)
                label = distlib.DistParams(name, {k: float(v) for k, v in params.items()}).label() \
                    if name in distlib.catalog() else name
                records.append({"dist": label, "spec": spec_kind, "method": method, "seed": seed, **r})
                cell += 1
    with _sink(args.output) as out:
        if args.json:
            json.dump(records, out, indent=1)
            out.write("\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(BENCH_COLUMNS)
            for r in records:
                w.writerow([r["dist"], r["spec"], r["method"], r["count"], repr(r["bits_per_variate"]),
                            f"{r['variates_per_sec']:.1f}", r["seed"]])
    return EXIT_OK


def cmd_range(args) -> int:
    dists = args.dist or ["exponential"]
    if dists == ["all"]:
        dists = distlib.catalog()
    rows = []
    for dist in dists:
        for spec_kind in args.spec.split(","):
            spec = make_spec(args, dist, spec_kind)
            t0 = time.perf_counter()
            lo, hi = support_codes(spec)
            dt = time.perf_counter() - t0
            rows.append({"dist": dist, "spec": spec_kind, "min": format_value(spec.fmt, lo),
                         "max": format_value(spec.fmt, hi), "min_code": format_code(spec.fmt, lo),
                         "max_code": format_code(spec.fmt, hi), "seconds": dt})
    with _sink(args.output) as out:
        if args.json:
            json.dump(rows, out, indent=1)
            out.write("\n")
        else:
            for r in rows:
                lo, hi = float(r["min"]), float(r["max"])
                out.write(f"{r['dist']:<16} {r['spec']:<4} [{lo:.6e}, {hi:.6e}]  "
                          f"({r['min_code']} .. {r['max_code']}, {r['seconds'] * 1e6:.0f} us)\n")
    return EXIT_OK


def cmd_coverage(args) -> int:
    if not args.empirical:
        if args.E is None or args.m is None or args.l is None:
            raise UsageError("analytic coverage needs --E, --m and --l (or use --empirical)")
        try:
            dens = coverage_density(args.E, args.m, args.l)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        with _sink(args.output) as out:
            if args.json:
                json.dump({"E": args.E, "m": args.m, "l": args.l, "density": str(dens),
                           "percent": 100 * float(dens)}, out)
                out.write("\n")
            else:
                out.write(f"F^{args.E}_{args.m}, l={args.l}: {dens} = {100 * float(dens):.2f}%\n")
        return EXIT_OK

    fmt = parse_format(args.format or "float:E=5,m=2")
    if fmt.kind is not Kind.FLOAT or fmt.width > 8:
        raise UsageError("empirical coverage needs an emulated float format of width <= 8")
    F = distlib.uniform_unit_cdf(args.rounding, fmt)
    masses = distlib.uniform_unit_masses(args.rounding, fmt)
    batch = sample(F, PrngSource(args.seed), args.count, "opt")
    exact = dict(zip(*np.unique(batch.codes, return_counts=True)))
    div = dict(zip(*np.unique(distlib.division_uniform_codes(fmt, args.count, args.seed), return_counts=True)))
    rows = []
    for code in sorted(masses, key=fmt.phi_inv):
        p = masses[code]
        rows.append({"code": format_code(fmt, code), "value": format_value(fmt, code), "p": str(p),
                     "expected": args.count * float(p), "exact": int(exact.get(code, 0)),
                     "division": int(div.get(code, 0))})
    with _sink(args.output) as out:
        if args.json:
            json.dump({"format": str(fmt), "count": args.count, "seed": args.seed, "rows": rows}, out, indent=1)
            out.write("\n")
        else:
            out.write(f"{'#':>3} {'float':>20} {'p':>10} {'expected':>12} {'exact':>10} {'division':>10}\n")
            for i, r in enumerate(rows):
                out.write(f"{i:>3} {float(r['value']):>20.16f} {r['p']:>10} {r['expected']:>12.1f} "
                          f"{r['exact']:>10} {r['division']:>10}\n")
            seen = sum(1 for r in rows if r["exact"])
            seen_div = sum(1 for r in rows if r["division"])
            out.write(f"covered: exact {seen}/{len(rows)}, division {seen_div}/{len(rows)}\n")
    return EXIT_OK


def cmd_quantile(args) -> int:
    spec = make_spec(args, args.dist, args.spec)
    if spec.kind == "cdf":
        if args.tail is not None:
            raise UsageError("--tail applies to sf/ddf specs")
        q = float(Fraction(args.q))
        code = quantile(spec, q)
        target = repr(q)
    else:
        if args.tail is not None:
            d, f = 1, float(Fraction(args.tail))
        else:
            q = Fraction(args.q)
            d, f = (0, float(q)) if q <= Fraction(1, 2) else (1, float(1 - q))
            if Fraction(f) != (q if d == 0 else 1 - q):
                raise UsageError(f"cumulative {args.q} is not exact as a dual pair; use --tail")
        code = quantile_ddf(spec, d, f)
        target = repr((d, f))
    fmt = spec.fmt
    res = {"target": target, "code": format_code(fmt, code), "value": format_value(fmt, code),
           "cumulative": repr(spec.eval(code))}
    with _sink(args.output) as out:
        if args.json:
            json.dump(res, out)
            out.write("\n")
        else:
            out.write(f"{res['code']} {res['value']} {res['cumulative']}\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = make_spec(args, args.dist, args.spec, check=False)
    rep = validate(spec, samples=args.samples, seed=args.seed)
    with _sink(args.output) as out:
        if args.json:
            json.dump({"ok": rep.ok, "exhaustive": rep.exhaustive, "checked_pairs": rep.checked_pairs,
                       "endpoint_ok": rep.endpoint_ok,
                       "violations": [[hex(a), hex(b), repr(v), repr(w)] for a, b, v, w in rep.violations[:100]],
                       "codomain": [[hex(a), repr(v)] for a, v in rep.codomain[:100]]}, out, indent=1)
            out.write("\n")
        else:
            out.write(rep.summary() + "\n")
    return EXIT_OK if rep.ok else EXIT_INVALID


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--prob", default="f32", help="probability float: f32 or f64 (default f32)")
    common.add_argument("--format", default=None,
                        help="code format descriptor (default: f64, or uint:16 for geometric)")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--json", action="store_true")
    common.add_argument("--param", default=None, help="distribution parameters, e.g. s=1 or a=0.1,b=3.14")

    p = _Parser(prog="exactrvg", description="Exact random variate generation from finite-precision CDFs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="draw variates")
    g.add_argument("--dist", required=True)
    g.add_argument("--spec", choices=["cdf", "sf", "ddf"], default="cdf")
    g.add_argument("--method", choices=["opt", "cbs"], default="opt")
    g.add_argument("--count", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", parents=[common], help="bits/variate and variates/sec as CSV")
    b.add_argument("--dist", action="append", help="repeatable; name or name:k=v,...; 'all' for the catalog")
    b.add_argument("--spec", default="cdf", help="comma list of cdf,sf,ddf")
    b.add_argument("--method", default="opt,cbs", help="comma list of opt,cbs")
    b.add_argument("--count", type=int, default=100_000)
    b.add_argument("--repeats", type=int, default=5)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("range", parents=[common], help="support range of each spec")
    r.add_argument("--dist", action="append")
    r.add_argument("--spec", default="cdf,sf,ddf")
    r.set_defaults(func=cmd_range)

    c = sub.add_parser("coverage", parents=[common], help="float coverage of exact uniform generation")
    c.add_argument("--E", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--l", type=int)
    c.add_argument("--empirical", action="store_true")
    c.add_argument("--rounding", choices=["up", "down"], default="down")
    c.add_argument("--count", type=int, default=10_000_000)
    c.set_defaults(func=cmd_coverage)

    q = sub.add_parser("quantile", parents=[common], help="smallest code reaching a cumulative probability")
    q.add_argument("--dist", required=True)
    q.add_argument("--spec", choices=["cdf", "sf", "ddf"], default="cdf")
    q.add_argument("--q", default="1", help="cumulative probability (decimal or fraction)")
    q.add_argument("--tail", default=None, help="for sf/ddf: target the pair (1, TAIL)")
    q.set_defaults(func=cmd_quantile)

    v = sub.add_parser("validate", parents=[common], help="check monotonicity, endpoint and codomain")
    v.add_argument("--dist", required=True)
    v.add_argument("--spec", choices=["cdf", "sf", "ddf"], default="cdf")
    v.add_argument("--samples", type=int, default=1_000_000)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, distlib.ParamError, FormatError) as exc:
        print(f"exactrvg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"exactrvg: validation failed\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpecViolation as exc:
        print(f"exactrvg: spec violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
