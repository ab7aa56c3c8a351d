"""Exact-rational ground truth: digits, DDG enumeration, Knuth-Yao cost, entropy.

Nothing here is used on a production path. Everything is Fraction-based and
may be slow; that is the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .entropy import ReplaySource, SourceExhausted

__all__ = [
    "rational_digit", "rational_digits", "expansion_period", "DdgEnumeration",
    "enumerate_ddg", "knuth_yao_cost", "ky_cost_of", "shannon_entropy",
    "exact_pmf",
]


def rational_digit(q, l: int) -> int:
    """Digit l of the concise binary expansion of q >= 0 (l = 0 is the units digit)."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative rational")
    if l < 0:
        raise ValueError("digit index must be >= 0")
    t = q.numerator << l
    return (t // q.denominator) & 1


def rational_digits(q, start: int, stop: int) -> list[int]:
    q = Fraction(q)
    return [rational_digit(q, l) for l in range(start, stop + 1)]


def expansion_period(q) -> tuple[int, list[int], list[int]]:
    """(integer part, pre-period digits, period digits) of a rational in [0, 1].

    Dyadic rationals come back with the period [0].
    """
    q = Fraction(q)
    whole = q.numerator // q.denominator
    r, k = q.numerator - whole * q.denominator, q.denominator
    seen: dict[int, int] = {}
    digits: list[int] = []
    while r not in seen:
        seen[r] = len(digits)
        r <<= 1
        if r >= k:
            digits.append(1)
            r -= k
        else:
            digits.append(0)
    s = seen[r]
    return whole, digits[:s], digits[s:]


def ky_cost_of(p) -> Fraction:
    """sum_l l * 2**-l * [p]_l, the depth-weighted mass an optimal tree spends on p."""
    p = Fraction(p)
    if p == 0:
        return Fraction(0)
    whole, pre, per = expansion_period(p)
    total = Fraction(0)  # the units digit sits at depth 0
    for i, d in enumerate(pre, start=1):
        if d:
            total += Fraction(i, 1 << i)
    if per == [0]:
        return total
    s, T = len(pre), len(per)
    r = Fraction(1, 1 << T)
    geo, dgeo = 1 / (1 - r), r / (1 - r) ** 2
    for t, d in enumerate(per, start=1):
        if d:
            w = Fraction(1, 1 << (s + t))
            total += w * ((s + t) * geo + T * dgeo)
    return total


def shannon_entropy(P) -> float:
    """Base-2 entropy of a mapping or sequence of masses."""
    masses = P.values() if isinstance(P, Mapping) else P
    h = 0.0
    for p in masses:
        p = Fraction(p)
        if p > 0:
            h -= float(p) * (math.log2(p.numerator) - math.log2(p.denominator))
    return h


def exact_pmf(spec) -> dict[int, Fraction]:
    """P_F(b) for every code with positive mass, from a CDF or dual spec (small formats)."""
    from .dist_spec import cumulative_exact

    fmt = spec.fmt
    out: dict[int, Fraction] = {}
    prev = Fraction(0)
    for u in range(1 << fmt.width):
        c = fmt.phi(u)
        cur = cumulative_exact(spec, c)
        if cur != prev:
            out[c] = cur - prev
        prev = cur
    return out


def knuth_yao_cost(spec_or_pmf) -> Fraction:
    """Optimal expected flips for a CDF/DDF spec or for an explicit pmf."""
    if isinstance(spec_or_pmf, Mapping):
        masses: Iterable = spec_or_pmf.values()
    elif hasattr(spec_or_pmf, "fmt"):
        masses = exact_pmf(spec_or_pmf).values()
    else:
        masses = spec_or_pmf
    return sum((ky_cost_of(p) for p in masses), Fraction(0))


@dataclass
class DdgEnumeration:
    outcomes: dict = field(default_factory=dict)
    cost_terms: dict = field(default_factory=dict)
    residual: Fraction = Fraction(0)
    halting_inputs: list = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return sum(self.outcomes.values(), Fraction(0)) + self.residual

    @property
    def expected_cost(self) -> Fraction:
        """Expected flips over halted paths (a lower bound if residual > 0)."""
        return sum((c * w for c, w in self.cost_terms.items()), Fraction(0))


def enumerate_ddg(gen: Callable, depth: int = 64, keep_inputs: bool = False) -> DdgEnumeration:
    """Explore every input bit string up to ``depth`` bits.

    ``gen(source)`` runs a generator on a bit source and returns its output.
    It must be deterministic given the bits. A run that asks for bit
    number |u| + 1 is split into u0 and u1. A run that halts on u has mass 2**-|u|.
    """
    res = DdgEnumeration()
    stack: list[tuple[int, ...]] = [()]
    while stack:
        u = stack.pop()
        src = ReplaySource(u)
        try:
            out = gen(src)
        except SourceExhausted:
            if len(u) >= depth:
                res.residual += Fraction(1, 1 << len(u))
            else:
                stack.append(u + (1,))
                stack.append(u + (0,))
            continue
        if src.bits_consumed != len(u):
            raise AssertionError(f"generator halted after {src.bits_consumed} of {len(u)} bits")
        out = getattr(out, "code", out)
        key = getattr(out, "bits", out)
        w = Fraction(1, 1 << len(u))
        res.outcomes[key] = res.outcomes.get(key, Fraction(0)) + w
        res.cost_terms[len(u)] = res.cost_terms.get(len(u), Fraction(0)) + w
        if keep_inputs:
            res.halting_inputs.append(u)
    return res
