"""Ready-made CDF/SF specs.

Every catalog entry is a pair of compiled functions ``fn(x, params) -> float``
evaluated in binary64. The spec rounds the result to the probability config.
The Python-side ``eval`` calls the same compiled functions, so the reference
generators and the bulk kernels see identical probabilities.

Parameter names follow the usual conventions (GSL-style):

=============  ===============  ==========================================
name           params           CDF
=============  ===============  ==========================================
cauchy         a                1/2 + atan(x/a)/pi
exponential    s                1 - exp(-x/s)
flat           a, b             (x - a)/(b - a) on [a, b]
gaussian       sigma            erfc(-x / (sigma sqrt 2)) / 2
gumbel1        a, b             exp(-b exp(-a x))
gumbel2        a, b             exp(-b x^-a), x > 0
laplace        a                exp(x/a)/2 for x < 0
logistic       a                1/(1 + exp(-x/a))
pareto         a, b             1 - (b/x)^a, x >= b
rayleigh       sigma            1 - exp(-x^2 / (2 sigma^2))
weibull        a, b             1 - exp(-(x/a)^b)
geometric      p                1 - (1-p)^(k+1) over uint:16 codes k
=============  ===============  ==========================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numba as nb
import numpy as np

from .bitops import F32, F64, ProbConfig
from .dist_spec import FiniteCdf, FiniteSf, _require, make_ddf, sf_as_ddf
from .formats import FormatSpec, Kind, parse_format

__all__ = [
    "DistParams", "CatalogEntry", "catalog", "get", "uniform_unit_cdf", "exponential_cdf",
    "exponential_sf", "build", "ParamError", "uniform_unit_masses", "division_uniform_codes",
    "named_spec", "parity_cdf", "cdf_spec", "sf_spec",
]


_CDF_MODE, _SF_MODE = 1, 4


class ParamError(ValueError):
    pass


# ------------------------------------------------------------------ compiled CDF/SF pairs

@nb.njit(cache=True)
def _exp_cdf(x, p):
    return 0.0 if x <= 0 else -math.expm1(-x / p[0])


@nb.njit(cache=True)
def _exp_sf(x, p):
    return 1.0 if x <= 0 else math.exp(-x / p[0])


@nb.njit(cache=True)
def _cauchy_cdf(x, p):
    u = x / p[0]
    if u > -1.0:
        return 0.5 + math.atan(u) / math.pi
    return math.atan(-1.0 / u) / math.pi


@nb.njit(cache=True)
def _cauchy_sf(x, p):
    return _cauchy_cdf(-x, p)


@nb.njit(cache=True)
def _flat_cdf(x, p):
    a, b = p[0], p[1]
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    return (x - a) / (b - a)


@nb.njit(cache=True)
def _flat_sf(x, p):
    a, b = p[0], p[1]
    if x <= a:
        return 1.0
    if x >= b:
        return 0.0
    return (b - x) / (b - a)


@nb.njit(cache=True)
def _gumbel1_cdf(x, p):
    return math.exp(-p[1] * math.exp(-p[0] * x))


@nb.njit(cache=True)
def _gumbel1_sf(x, p):
    return -math.expm1(-p[1] * math.exp(-p[0] * x))


@nb.njit(cache=True)
def _gumbel2_cdf(x, p):
    if x <= 0:
        return 0.0
    return math.exp(-p[1] * math.pow(x, -p[0]))


@nb.njit(cache=True)
def _gumbel2_sf(x, p):
    if x <= 0:
        return 1.0
    return -math.expm1(-p[1] * math.pow(x, -p[0]))


@nb.njit(cache=True)
def _laplace_cdf(x, p):
    u = x / p[0]
    if u < 0:
        return 0.5 * math.exp(u)
    return 1.0 - 0.5 * math.exp(-u)


@nb.njit(cache=True)
def _laplace_sf(x, p):
    return _laplace_cdf(-x, p)


@nb.njit(cache=True)
def _logistic_cdf(x, p):
    u = x / p[0]
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


@nb.njit(cache=True)
def _logistic_sf(x, p):
    return _logistic_cdf(-x, p)


@nb.njit(cache=True)
def _pareto_cdf(x, p):
    a, b = p[0], p[1]
    if x < b:
        return 0.0
    return 1.0 - math.pow(b / x, a)


@nb.njit(cache=True)
def _pareto_sf(x, p):
    a, b = p[0], p[1]
    if x < b:
        return 1.0
    return math.pow(b / x, a)


@nb.njit(cache=True)
def _rayleigh_cdf(x, p):
    if x <= 0:
        return 0.0
    u = x / p[0]
    return -math.expm1(-u * u / 2)


@nb.njit(cache=True)
def _rayleigh_sf(x, p):
    if x <= 0:
        return 1.0
    u = x / p[0]
    return math.exp(-u * u / 2)


@nb.njit(cache=True)
def _gaussian_cdf(x, p):
    return 0.5 * math.erfc(-x / (p[0] * math.sqrt(2.0)))


@nb.njit(cache=True)
def _gaussian_sf(x, p):
    return 0.5 * math.erfc(x / (p[0] * math.sqrt(2.0)))


@nb.njit(cache=True)
def _weibull_cdf(x, p):
    if x <= 0:
        return 0.0
    return -math.expm1(-math.pow(x / p[0], p[1]))


@nb.njit(cache=True)
def _weibull_sf(x, p):
    if x <= 0:
        return 1.0
    return math.exp(-math.pow(x / p[0], p[1]))


@nb.njit(cache=True)
def _geometric_cdf(x, p):
    if x < 0:
        return 0.0
    return -math.expm1((x + 1.0) * math.log1p(-p[0]))


@nb.njit(cache=True)
def _geometric_sf(x, p):
    if x < 0:
        return 1.0
    return math.exp((x + 1.0) * math.log1p(-p[0]))


# ------------------------------------------------------------------ catalog

def _positive(*names):
    def check(p):
        for n in names:
            if not p[n] > 0:
                raise ParamError(f"{n} must be > 0, got {p[n]}")
    return check


def _flat_check(p):
    if not p["a"] < p["b"]:
        raise ParamError(f"need a < b, got a={p['a']}, b={p['b']}")


def _geom_check(p):
    if not 0 < p["p"] < 1:
        raise ParamError(f"need 0 < p < 1, got {p['p']}")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: tuple          # parameter names, in kernel order
    defaults: dict
    cdf: Callable
    sf: Callable
    check: Callable
    fmt: str = "f64"       # default code format


_CATALOG = {
    e.name: e for e in [
        CatalogEntry("cauchy", ("a",), {"a": 1.0}, _cauchy_cdf, _cauchy_sf, _positive("a")),
        CatalogEntry("exponential", ("s",), {"s": 1.0}, _exp_cdf, _exp_sf, _positive("s")),
        CatalogEntry("flat", ("a", "b"), {"a": 0.1, "b": 3.14}, _flat_cdf, _flat_sf, _flat_check),
        CatalogEntry("gaussian", ("sigma",), {"sigma": 1.0}, _gaussian_cdf, _gaussian_sf, _positive("sigma")),
        CatalogEntry("gumbel1", ("a", "b"), {"a": 1.0, "b": 1.0}, _gumbel1_cdf, _gumbel1_sf, _positive("a", "b")),
        CatalogEntry("gumbel2", ("a", "b"), {"a": 1.0, "b": 1.0}, _gumbel2_cdf, _gumbel2_sf, _positive("a", "b")),
        CatalogEntry("laplace", ("a",), {"a": 1.0}, _laplace_cdf, _laplace_sf, _positive("a")),
        CatalogEntry("logistic", ("a",), {"a": 1.0}, _logistic_cdf, _logistic_sf, _positive("a")),
        CatalogEntry("pareto", ("a", "b"), {"a": 3.0, "b": 2.0}, _pareto_cdf, _pareto_sf, _positive("a", "b")),
        CatalogEntry("rayleigh", ("sigma",), {"sigma": 1.0}, _rayleigh_cdf, _rayleigh_sf, _positive("sigma")),
        CatalogEntry("weibull", ("a", "b"), {"a": 1.0, "b": 1.0}, _weibull_cdf, _weibull_sf, _positive("a", "b")),
        CatalogEntry("geometric", ("p",), {"p": 0.4}, _geometric_cdf, _geometric_sf, _geom_check, "uint:16"),
    ]
}


def catalog() -> list[str]:
    return sorted(_CATALOG)


def get(name: str) -> CatalogEntry:
    try:
        return _CATALOG[name.lower()]
    except KeyError:
        raise ParamError(f"unknown distribution {name!r}; known: {', '.join(catalog())}") from None


@dataclass(frozen=True)
class DistParams:
    name: str
    params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        entry = get(self.name)
        unknown = set(self.params) - set(entry.params)
        if unknown:
            raise ParamError(f"{self.name} takes {entry.params}, got unknown {sorted(unknown)}")
        p = {**entry.defaults, **{k: float(v) for k, v in self.params.items()}}
        entry.check(p)
        return p

    def vector(self) -> np.ndarray:
        p = self.resolved()
        return np.array([p[k] for k in get(self.name).params], dtype=np.float64)

    def label(self) -> str:
        p = self.resolved()
        return f"{self.name}(" + ",".join(f"{p[k]:g}" for k in get(self.name).params) + ")"


def _evaluator(fmt: FormatSpec, fn, prm: np.ndarray, cfg: ProbConfig, at_nan: float):
    to_float, rnd = fmt.to_float, cfg.round

    def ev(c: int) -> float:
        x = to_float(c)
        if x != x:
            return at_nan
        return rnd(fn(x, prm))

    return ev


def _batch(fmt: FormatSpec, fn, prm, cfg: ProbConfig, mode: int):
    from . import _fast

    kind, n, E, m = _fast.kind_id(fmt), fmt.width, fmt.E, fmt.m

    def batch(codes):
        us = _fast.phi_inv_array_raw(codes, kind, n, E, m)
        return _fast._batch_eval(us, mode, kind, n, E, m, cfg.E, cfg.m, _fast.U0, fn, fn, prm)[1]

    return batch


def _check_fmt(fmt: FormatSpec) -> None:
    if fmt.kind not in (Kind.FLOAT, Kind.UINT, Kind.TWOS) or (fmt.kind is Kind.FLOAT and fmt.E > 11):
        raise ParamError(f"catalog specs support IEEE-style float, uint and tc formats, not {fmt}")


def cdf_spec(dist: DistParams, fmt: FormatSpec | str | None = None, prob: ProbConfig = F32,
             trusted: bool = False) -> FiniteCdf:
    entry = get(dist.name)
    fmt = parse_format(fmt or entry.fmt) if not isinstance(fmt, FormatSpec) else fmt
    _check_fmt(fmt)
    prm = dist.vector()
    return FiniteCdf.create(fmt, _evaluator(fmt, entry.cdf, prm, prob, 1.0), prob, f"{dist.label()}:cdf",
                            trusted=trusted, kernel=("cdf", entry.cdf, prm),
                            batch=_batch(fmt, entry.cdf, prm, prob, _CDF_MODE))


def sf_spec(dist: DistParams, fmt: FormatSpec | str | None = None, prob: ProbConfig = F32,
            trusted: bool = False) -> FiniteSf:
    entry = get(dist.name)
    fmt = parse_format(fmt or entry.fmt) if not isinstance(fmt, FormatSpec) else fmt
    _check_fmt(fmt)
    prm = dist.vector()
    return FiniteSf.create(fmt, _evaluator(fmt, entry.sf, prm, prob, 0.0), prob, f"{dist.label()}:sf",
                           trusted=trusted, kernel=("sf", entry.sf, prm),
                           batch=_batch(fmt, entry.sf, prm, prob, _SF_MODE))


def build(dist: DistParams, spec: str = "cdf", fmt=None, prob: ProbConfig = F32, check: bool = True):
    """A generator-ready spec: a CDF, an SF wrapped as a dual spec, or a CDF+SF dual spec."""
    if spec == "cdf":
        return cdf_spec(dist, fmt, prob, trusted=not check)
    if spec == "sf":
        return sf_as_ddf(sf_spec(dist, fmt, prob, trusted=not check), check=check)
    if spec == "ddf":
        F = cdf_spec(dist, fmt, prob, trusted=not check)
        S = sf_spec(dist, fmt, prob, trusted=not check)
        return make_ddf(F, S, check=check)
    raise ParamError(f"spec must be cdf, sf or ddf, not {spec!r}")


def exponential_cdf(s: float = 1.0, fmt="f64", prob: ProbConfig = F32) -> FiniteCdf:
    return cdf_spec(DistParams("exponential", {"s": s}), fmt, prob)


def exponential_sf(s: float = 1.0, fmt="f64", prob: ProbConfig = F32) -> FiniteSf:
    return sf_spec(DistParams("exponential", {"s": s}), fmt, prob)


# ------------------------------------------------------------------ uniform over a float format

def uniform_unit_cdf(rounding: str = "up", fmt: FormatSpec | str = "float:E=5,m=2") -> FiniteCdf:
    """The uniform distribution on [0, 1] rounded to a float format.

    ``up``: F(x) = clamp(x, 0, 1), so each float in (0, 1] collects the mass
    of the reals that round up to it. ``down``: F(x) = clamp(next(x), 0, 1),
    covering [0, 1). The probability config is the format itself, so every
    value is exact.
    """
    fmt = parse_format(fmt) if isinstance(fmt, str) else fmt
    if fmt.kind is not Kind.FLOAT:
        raise ParamError("uniform_unit_cdf needs an IEEE-style float format")
    if rounding not in ("up", "down"):
        raise ParamError("rounding must be 'up' or 'down'")
    prob = ProbConfig(fmt.E, fmt.m)
    top_finite = fmt.phi(fmt.phi_inv(((1 << fmt.E) - 1) << fmt.m) - 1)  # largest finite

    def clamp(v) -> float:
        return float(min(max(v, 0), 1))

    def F(c: int):
        x = fmt.value(c)
        if x.tag == "bottom" or x.tag == "+inf":
            return 1.0
        if x.tag == "-inf":
            return 0.0
        if rounding == "up":
            return clamp(x.value)
        if c == top_finite:
            return 1.0
        nxt = fmt.value(fmt.phi(fmt.phi_inv(c) + 1))
        return clamp(nxt.value) if nxt.is_finite else 1.0

    return FiniteCdf.create(fmt, F, prob, f"uniform-{rounding}[{fmt}]")


def uniform_unit_masses(rounding: str = "down", fmt: FormatSpec | str = "float:E=5,m=2") -> dict:
    """Exact probability of every code under ``uniform_unit_cdf`` (codes with mass only)."""
    from .oracle import exact_pmf

    return exact_pmf(uniform_unit_cdf(rounding, fmt))


def division_uniform_codes(fmt: FormatSpec | str, count: int, seed: int = 0, bits: int | None = None):
    """The usual division method: k / 2**bits for a uniform bits-wide k, rounded to ``fmt``.

    A comparator for coverage experiments, not an exact generator.
    """
    from .formats import encode_float

    fmt = parse_format(fmt) if isinstance(fmt, str) else fmt
    bits = fmt.width if bits is None else bits
    rng = np.random.Generator(np.random.SFC64(seed))
    ks = rng.integers(0, 1 << bits, size=count, dtype=np.uint64)
    table = np.array([encode_float(fmt, Fraction(k, 1 << bits)) for k in range(1 << bits)], dtype=np.uint64)
    return table[ks]


# ------------------------------------------------------------------ named specs for the command line

def parity_cdf(width: int = 4) -> FiniteCdf:
    """A deliberately broken CDF (the parity of the code); fails validation."""
    fmt = FormatSpec.uint(width)
    top = fmt.mask
    return FiniteCdf(fmt, lambda c: 1.0 if c == top else float(c & 1), F64, f"parity[{fmt}]")


def named_spec(name: str, params: dict, spec: str = "cdf", fmt=None, prob: ProbConfig = F32,
               check: bool = True):
    """Catalog distributions plus the ``uniform`` and ``parity`` fixtures."""
    if name == "uniform":
        rounding = params.get("rounding", "up")
        F = uniform_unit_cdf(rounding, fmt or "float:E=5,m=2")
        if spec != "cdf":
            raise ParamError("uniform is available as a cdf spec only")
        return F
    if name == "parity":
        if spec != "cdf":
            raise ParamError("parity is available as a cdf spec only")
        F = parity_cdf(int(params.get("width", 4)))
        if check:
            _require(F)
        return F
    return build(DistParams(name, params), spec, fmt, prob, check)
