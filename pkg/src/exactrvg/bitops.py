"""Digits of exact differences of probability floats, in word-sized integer arithmetic.

For floats x > x' in [0, 1] the real difference x - x' generally is not a
float, but its binary expansion has a fixed shape: a run of zeros, the
(m+1)-bit block ``g_hi``, a run of a constant bit ``b2``, the block ``g_lo``,
then zeros forever. ``preproc_*`` computes that description once and
``extract_bit`` reads digit l from it in O(1).

The same shape covers 1 - (x + x') for x, x' in [0, 1/2], which is what the
dual (CDF/SF) representation needs.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .formats import float_bits_round, float_bits_value

__all__ = [
    "ProbConfig", "F32", "F64", "ProbFloat", "BitExtractor", "PreconditionError",
    "preproc_sub", "preproc_sum_complement", "preproc_dual", "extract_bit",
    "word_bound_violations",
]


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class ProbConfig:
    """The float format F^E_m that probabilities live in.

    (8, 23) and (11, 52) map onto host binary32/binary64. Anything else is
    emulated: values are still held in host doubles (every value of a format
    with E <= 10, m <= 52 is an exact double) and their bit patterns are
    computed exactly.
    """

    E: int
    m: int

    @property
    def bias(self) -> int:
        return (1 << (self.E - 1)) - 1

    @property
    def grain(self) -> int:
        """delta such that every value in the format is a multiple of 2**-delta."""
        return (1 << (self.E - 1)) + self.m - 2

    @property
    def width(self) -> int:
        return 1 + self.E + self.m

    @property
    def smallest(self) -> float:
        return math.ldexp(1.0, -self.grain)

    def describe(self) -> str:
        return {(8, 23): "f32", (11, 52): "f64"}.get((self.E, self.m), f"float:E={self.E},m={self.m}")

    def bits(self, v: float) -> int:
        if (self.E, self.m) == (8, 23):
            return struct.unpack("<I", struct.pack("<f", v))[0]
        if (self.E, self.m) == (11, 52):
            return struct.unpack("<Q", struct.pack("<d", v))[0]
        return float_bits_round(v, self.E, self.m)

    def from_bits(self, bits: int) -> float:
        return float(float_bits_value(bits, self.E, self.m))

    def round(self, x) -> float:
        """Nearest value of the format (ties to even)."""
        if (self.E, self.m) == (11, 52):
            return float(x)
        if (self.E, self.m) == (8, 23) and isinstance(x, float):
            return float(np.float32(x))
        return self.from_bits(float_bits_round(x, self.E, self.m))

    def contains(self, v: float) -> bool:
        return self.from_bits(self.bits(v)) == v

    def succ(self, v: float) -> float:
        """Next larger value (v >= 0)."""
        return self.from_bits(self.bits(v) + 1)

    def pred(self, v: float) -> float:
        """Next smaller value (v > 0)."""
        return self.from_bits(self.bits(v) - 1)

    def unit_values(self) -> list[float]:
        """Every value in [0, 1], ascending (small formats only)."""
        one = self.bits(1.0)
        return [self.from_bits(b) for b in range(one + 1)]

    def scaled(self, v: float) -> int:
        """v * 2**grain as an exact integer."""
        e_hat, f = decode(v, self)
        return f << (e_hat - self.m + self.grain)


F32 = ProbConfig(8, 23)
F64 = ProbConfig(11, 52)


class ProbFloat(NamedTuple):
    """A probability together with the float format it lives in."""

    value: float
    config: ProbConfig = F64

    def check(self) -> "ProbFloat":
        v = self.value
        if not (0.0 <= v <= 1.0) or not self.config.contains(v):
            raise PreconditionError(f"{v!r} is not in {self.config.describe()} ∩ [0,1]")
        return self


class BitExtractor(NamedTuple):
    n1: int
    n2: int
    n_hi: int
    n_lo: int
    b1: int
    b2: int
    g_hi: int
    g_lo: int

    @property
    def support(self) -> int:
        """Index of the last digit that can be nonzero."""
        return self.n1 + self.n_hi + self.n2 + self.n_lo


def decode(v: float, cfg: ProbConfig) -> tuple[int, int]:
    """(e_hat, f): unbiased exponent and integer significand read from the bit pattern."""
    bits = cfg.bits(v)
    m = cfg.m
    e = (bits >> m) & ((1 << cfg.E) - 1)
    sub = int(e == 0)
    e_hat = e - cfg.bias + sub
    f = ((1 << m) | (bits & ((1 << m) - 1))) - (sub << m)
    return e_hat, f


def _unwrap(x, cfg):
    if isinstance(x, ProbFloat):
        return x.value, x.config
    return float(x), cfg


def _split(x: float, x2: float, cfg: ProbConfig, trace):
    e_hat, f = decode(x, cfg)
    e_hat2, f2 = decode(x2, cfg)
    m = cfg.m
    d = e_hat - e_hat2
    f2_hi = f2 >> min(d, cfg.E + m)
    f2_lo = f2 & ((1 << min(d, m + 1)) - 1)
    if trace is not None:
        trace.update(e_hat=e_hat, e_hat2=e_hat2, f=f, f2=f2, d=d, f2_hi=f2_hi, f2_lo=f2_lo)
    return e_hat, f, d, f2_hi, f2_lo


def _preproc1(x: float, x2: float, cfg: ProbConfig, trace=None) -> BitExtractor:
    m = cfg.m
    e_hat, f, d, f2_hi, f2_lo = _split(x, x2, cfg, trace)
    one = int(x == 1.0)
    n1 = -e_hat - 1 + one
    n2 = max(d - (m + 1), 0)
    n_hi = m + 1 - one
    n_lo = min(d, m + 1)
    b2 = int(f2_lo > 0)
    g_hi = f - f2_hi - b2
    g_lo = (b2 << n_lo) - f2_lo
    return BitExtractor(n1, n2, n_hi, n_lo, 0, b2, g_hi, g_lo)


def _preproc2(x: float, x2: float, cfg: ProbConfig, trace=None) -> BitExtractor:
    if x < x2:
        x, x2 = x2, x
    m = cfg.m
    e_hat, f, d, f2_hi, f2_lo = _split(x, x2, cfg, trace)
    half = int(x == 0.5)
    n1 = -e_hat - 2 + half
    n2 = max(d - (m + 1), 0)
    n_hi = m + 2 - half
    n_lo = min(d, m + 1)
    b2 = int(f2_lo > 0)
    g_hi = (1 << n_hi) - f - f2_hi - b2
    g_lo = (b2 << n_lo) - f2_lo
    return BitExtractor(n1, n2, n_hi, n_lo, 1, b2, g_hi, g_lo)


def _check_unit(v: float, cfg: ProbConfig, hi: float = 1.0) -> None:
    if not (0.0 <= v <= hi) or not cfg.contains(v):
        raise PreconditionError(f"{v!r} is not a {cfg.describe()} value in [0, {hi}]")


def preproc_sub(x, x2, cfg: ProbConfig = F64) -> BitExtractor:
    """Digit description of x - x2, for x > x2 with 0 < x - x2 < 1."""
    x, cfg = _unwrap(x, cfg)
    x2, _ = _unwrap(x2, cfg)
    _check_unit(x, cfg)
    _check_unit(x2, cfg)
    if not x > x2:
        raise PreconditionError(f"need x > x': {x!r} <= {x2!r}")
    if x == 1.0 and x2 == 0.0:
        raise PreconditionError("difference 1 - 0 is not in (0, 1)")
    return _preproc1(x, x2, cfg)


def preproc_sum_complement(x, x2, cfg: ProbConfig = F64) -> BitExtractor:
    """Digit description of 1 - (x + x2), for x, x2 in [0, 1/2] with 0 < x + x2 < 1."""
    x, cfg = _unwrap(x, cfg)
    x2, _ = _unwrap(x2, cfg)
    _check_unit(x, cfg, 0.5)
    _check_unit(x2, cfg, 0.5)
    if x + x2 == 0.0 or (x == 0.5 and x2 == 0.5):
        raise PreconditionError("need 0 < x + x' < 1")
    return _preproc2(x, x2, cfg)


def preproc_dual(d: int, f, d2: int, f2, cfg: ProbConfig = F64) -> BitExtractor:
    """Digits of G*(d, f) - G*(d2, f2) where G*(d, f) = f if d == 0 else 1 - f."""
    if d == 0 and d2 == 0:
        return preproc_sub(f, f2, cfg)
    if d == 1 and d2 == 1:
        return preproc_sub(f2, f, cfg)
    if d == 1 and d2 == 0:
        return preproc_sum_complement(f, f2, cfg)
    raise PreconditionError("dispatch (d, d') = (0, 1) cannot arise from a monotone DDF")


def extract_bit(beta: BitExtractor, l: int) -> int:
    """Digit l >= 1 of the number described by ``beta``."""
    n1, n2, n_hi, n_lo, b1, b2, g_hi, g_lo = beta
    if l <= n1:
        return b1
    l -= n1
    if l <= n_hi:
        return (g_hi >> (n_hi - l)) & 1
    l -= n_hi
    if l <= n2:
        return b2
    l -= n2
    if l <= n_lo:
        return (g_lo >> (n_lo - l)) & 1
    return 0


def word_bound_violations(x: float, x2: float, cfg: ProbConfig, complement: bool = False) -> list[str]:
    """Shadow check: every intermediate must fit a (1+E+m)-bit signed integer.

    Python integers are unbounded, so this recomputes the preprocessing and
    reports any intermediate (or shift amount) outside the signed range.
    """
    trace: dict = {}
    beta = (_preproc2 if complement else _preproc1)(x, x2, cfg, trace)
    trace.update(beta._asdict())
    lo, hi = -(1 << (cfg.E + cfg.m)), (1 << (cfg.E + cfg.m)) - 1
    bad = [k for k, v in trace.items() if not lo <= v <= hi]
    if not (0 <= beta.g_hi < (1 << beta.n_hi) and 0 <= beta.g_lo < (1 << beta.n_lo)):
        bad.append("g-range")
    if min(beta.n1, beta.n2, beta.n_hi, beta.n_lo) < 0:
        bad.append("negative-count")
    return bad


def exact_difference(x: float, x2: float) -> Fraction:
    return Fraction(x) - Fraction(x2)
