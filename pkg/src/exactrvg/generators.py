"""Random variate generators.

``gen_opt`` / ``gen_opt_ddf`` are entropy optimal: they walk the output code
one bit at a time (most significant first, in the unsigned order that phi
sorts) and decide each bit by lazily exploring the optimal DDG tree, reading
digits of exact probability differences through ``bitops``.

``gen_cbs`` / ``gen_cbs_ddf`` decide each bit with an exact Bernoulli draw on
the conditional probability instead. They are exact but spend more bits.

``gen_univ`` is the rational-arithmetic version of the optimal walk, for any
prefix-consistent map p from bit strings to probabilities.

All generators here are single-variate reference implementations. Bulk
sampling with compiled kernels lives in ``sample``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, NamedTuple

from .bitops import BitExtractor, ProbConfig, _preproc1, _preproc2, extract_bit
from .dist_spec import DualDistFn, FiniteCdf, SpecViolation, compare_lte, p_of_prefix
from .entropy import BitSource
from .formats import Code
from .oracle import rational_digit

__all__ = [
    "GenResult", "MultiWordUInt", "RationalBcd", "gen_univ", "gen_opt", "gen_opt_ddf",
    "gen_cbs", "gen_cbs_ddf", "bernoulli", "binary_expansion", "exact_ratio",
    "exact_ratio_ddf", "ratio_width", "Sampler", "Batch", "sample",
]


class GenResult(NamedTuple):
    code: Code
    flips: int


# ------------------------------------------------------------------ fixed-capacity integers

class MultiWordUInt:
    """Unsigned integer in a fixed number of little-endian 64-bit limbs.

    Only the operations the Bernoulli loop needs: doubling, compare, subtract.
    Exceeding the capacity raises ``OverflowError`` instead of growing.
    """

    __slots__ = ("limbs",)
    MASK = (1 << 64) - 1

    def __init__(self, value: int, capacity_bits: int):
        nl = max(1, -(-capacity_bits // 64))
        if value < 0 or value.bit_length() > 64 * nl:
            raise OverflowError(f"{value.bit_length()}-bit value exceeds {nl} limbs")
        self.limbs = [(value >> (64 * j)) & self.MASK for j in range(nl)]

    @property
    def capacity(self) -> int:
        return 64 * len(self.limbs)

    def __int__(self) -> int:
        return sum(v << (64 * j) for j, v in enumerate(self.limbs))

    def bit_length(self) -> int:
        return int(self).bit_length()

    def copy(self) -> "MultiWordUInt":
        out = MultiWordUInt.__new__(MultiWordUInt)
        out.limbs = list(self.limbs)
        return out

    def shl1(self) -> None:
        carry = 0
        for j, v in enumerate(self.limbs):
            self.limbs[j] = ((v << 1) & self.MASK) | carry
            carry = v >> 63
        if carry:
            raise OverflowError("doubling overflowed the limb capacity")

    def cmp(self, other: "MultiWordUInt") -> int:
        for a, b in zip(reversed(self.limbs), reversed(other.limbs)):
            if a != b:
                return 1 if a > b else -1
        return 0

    def isub(self, other: "MultiWordUInt") -> None:
        borrow = 0
        for j, (a, b) in enumerate(zip(self.limbs, other.limbs)):
            d = a - b - borrow
            borrow = int(d < 0)
            self.limbs[j] = d & self.MASK
        if borrow:
            raise OverflowError("subtraction underflow")

    def __repr__(self) -> str:
        return f"MultiWordUInt({int(self)}, limbs={len(self.limbs)})"


def _as_mw(v, cap: int) -> MultiWordUInt:
    return v.copy() if isinstance(v, MultiWordUInt) else MultiWordUInt(int(v), cap)


# ------------------------------------------------------------------ Bernoulli and expansions

def bernoulli(i, k, src: BitSource) -> int:
    """1 with probability exactly i/k (0 < i < k), at optimal expected cost."""
    if isinstance(i, MultiWordUInt) or isinstance(k, MultiWordUInt):
        cap = max(getattr(i, "capacity", 0), getattr(k, "capacity", 0), int(k).bit_length() + 1)
        ii, kk = _as_mw(i, cap), _as_mw(k, cap)
        if len(ii.limbs) != len(kk.limbs):
            n = max(len(ii.limbs), len(kk.limbs))
            ii, kk = MultiWordUInt(int(ii), 64 * n), MultiWordUInt(int(kk), 64 * n)
        if not 0 < int(ii) < int(kk):
            raise ValueError("need 0 < i < k")
        while True:
            ii.shl1()
            c = ii.cmp(kk)
            if c == 0:
                return src.next_bit()
            if c > 0:
                b = 1
                ii.isub(kk)
            else:
                b = 0
            if src.next_bit():
                return b
    i, k = int(i), int(k)
    if not 0 < i < k:
        raise ValueError("need 0 < i < k")
    while True:
        i <<= 1
        if i == k:
            return src.next_bit()
        if i > k:
            b = 1
            i -= k
        else:
            b = 0
        if src.next_bit():
            return b


def binary_expansion(i, k) -> Iterator[int]:
    """Digits 1, 2, ... of the concise expansion of i/k (0 < i < k), forever."""
    i, k = int(i), int(k)
    if not 0 < i < k:
        raise ValueError("need 0 < i < k")
    while True:
        i <<= 1
        if i == k:
            yield 1
            while True:
                yield 0
        if i > k:
            i -= k
            yield 1
        else:
            yield 0


def exact_ratio(f0: float, f2: float, f1: float, cfg: ProbConfig) -> tuple[MultiWordUInt, MultiWordUInt]:
    """(i, k) with i/k = (f1 - f2)/(f1 - f0), not reduced."""
    if not f0 < f2 < f1:
        raise ValueError("need f0 < f2 < f1")
    s0, s2, s1 = cfg.scaled(f0), cfg.scaled(f2), cfg.scaled(f1)
    cap = cfg.grain + 2
    return MultiWordUInt(s1 - s2, cap), MultiWordUInt(s1 - s0, cap)


def _gstar_scaled(d: int, f: float, cfg: ProbConfig) -> int:
    s = cfg.scaled(f)
    return (1 << cfg.grain) - s if d else s


def exact_ratio_ddf(p0: tuple, p2: tuple, p1: tuple, cfg: ProbConfig) -> tuple[MultiWordUInt, MultiWordUInt]:
    """(i, k) with i/k = (G*(p1) - G*(p2)) / (G*(p1) - G*(p0))."""
    s0, s2, s1 = (_gstar_scaled(d, f, cfg) for d, f in (p0, p2, p1))
    if not s0 < s2 < s1:
        raise ValueError("need G*(p0) < G*(p2) < G*(p1)")
    cap = cfg.grain + 2
    return MultiWordUInt(s1 - s2, cap), MultiWordUInt(s1 - s0, cap)


def ratio_width(i, k) -> int:
    """Total bits needed to hold the pair."""
    return int(i).bit_length() + int(k).bit_length()


# ------------------------------------------------------------------ rational prefix maps

class RationalBcd:
    """A prefix-consistent map from bit strings to exact rationals, with p('') = 1."""

    def __init__(self, fn: Callable[[str], Fraction], depth: int):
        self.fn = fn
        self.depth = depth
        self._memo: dict[str, Fraction] = {}

    def __call__(self, b: str) -> Fraction:
        v = self._memo.get(b)
        if v is None:
            v = self._memo[b] = Fraction(self.fn(b))
        return v

    @classmethod
    def from_leaves(cls, leaves: Mapping[str, Fraction]) -> "RationalBcd":
        depth = len(next(iter(leaves)))
        if any(len(k) != depth for k in leaves):
            raise ValueError("all leaves must have the same length")
        if sum(leaves.values()) != 1:
            raise ValueError("leaf masses must sum to 1")
        tab = {k: Fraction(v) for k, v in leaves.items()}

        def fn(b: str) -> Fraction:
            return sum((v for k, v in tab.items() if k.startswith(b)), Fraction(0))

        return cls(fn, depth)

    @classmethod
    def from_cdf(cls, F: FiniteCdf) -> "RationalBcd":
        def fn(b: str) -> Fraction:
            lo, hi = p_of_prefix(F, b)
            return Fraction(hi) - Fraction(lo)

        return cls(fn, F.fmt.width)

    def check(self) -> bool:
        """p('') = 1 and p(b) = p(b0) + p(b1) for every prefix up to the depth."""
        if self("") != 1:
            return False
        frontier = [""]
        for _ in range(self.depth):
            nxt = []
            for b in frontier:
                if self(b) != self(b + "0") + self(b + "1"):
                    return False
                nxt += [b + "0", b + "1"]
            frontier = nxt
        return True


def gen_univ(p: RationalBcd, src: BitSource, depth: int) -> str:
    """Draw B_1..B_depth from p by lazily refining the optimal DDG tree."""
    b = ""
    l = 0
    for _ in range(depth):
        p0, p1 = p(b + "0"), p(b + "1")
        a0, a1 = rational_digit(p0, l), rational_digit(p1, l)
        if a0 == 1 and a1 == 0:
            b += "0"
            continue
        if a0 == 0 and a1 == 1:
            b += "1"
            continue
        while True:
            x = src.next_bit()
            l += 1
            if x == 0 and rational_digit(p0, l):
                b += "0"
                break
            if x == 1 and rational_digit(p1, l):
                b += "1"
                break
    return b


# ------------------------------------------------------------------ optimal generation

def _refine(beta0: BitExtractor, beta1: BitExtractor, l: int, src: BitSource) -> tuple[int, int]:
    """Decide one output bit; returns (bit, updated flip count)."""
    if l > 0:
        a0, a1 = extract_bit(beta0, l), extract_bit(beta1, l)
        if a0 == 1 and a1 == 0:
            return 0, l
        if a0 == 0 and a1 == 1:
            return 1, l
    while True:
        x = src.next_bit()
        l += 1
        if x == 0:
            if extract_bit(beta0, l):
                return 0, l
        elif extract_bit(beta1, l):
            return 1, l


def gen_opt(F: FiniteCdf, src: BitSource) -> GenResult:
    """One exact, entropy-optimal draw from the distribution of a CDF."""
    fmt, cfg, ev, phi = F.fmt, F.prob, F.eval, F.fmt.phi
    n = fmt.width
    start = src.bits_consumed
    b, l = 0, 0
    f0, f1 = 0.0, 1.0
    for depth in range(n):
        rest = n - depth - 1
        f2 = ev(phi((b << (rest + 1)) | ((1 << rest) - 1)))
        if f2 == f1:
            b <<= 1
            continue
        if f2 == f0:
            b = (b << 1) | 1
            continue
        if not f0 < f2 < f1:
            raise SpecViolation(f"CDF value {f2!r} outside ({f0!r}, {f1!r}); not monotone")
        beta0 = _preproc1(f2, f0, cfg)
        beta1 = _preproc1(f1, f2, cfg)
        bit, l = _refine(beta0, beta1, l, src)
        b = (b << 1) | bit
        if bit:
            f0 = f2
        else:
            f1 = f2
    return GenResult(Code(phi(b), n), src.bits_consumed - start)


def _dual_beta(p: tuple, q: tuple, cfg: ProbConfig) -> BitExtractor:
    """Digits of G*(p) - G*(q)."""
    d, f = p
    d2, f2 = q
    if d == 0 and d2 == 0:
        return _preproc1(f, f2, cfg)
    if d == 1 and d2 == 1:
        return _preproc1(f2, f, cfg)
    if d == 1 and d2 == 0:
        return _preproc2(f, f2, cfg)
    raise SpecViolation("dual spec asked for the (0, 1) dispatch; it is not monotone")


def _check_between(lo: tuple, mid: tuple, hi: tuple) -> None:
    if not (compare_lte(*lo, *mid) and compare_lte(*mid, *hi)):
        raise SpecViolation(f"dual value {mid!r} outside [{lo!r}, {hi!r}]; not monotone")


def gen_opt_ddf(G: DualDistFn, src: BitSource) -> GenResult:
    """Entropy-optimal draw from a dual (CDF/SF) spec."""
    fmt, cfg, ev, phi = G.fmt, G.prob, G.eval, G.fmt.phi
    n = fmt.width
    start = src.bits_consumed
    b, l = 0, 0
    p0, p1 = (0, 0.0), (1, 0.0)
    for depth in range(n):
        rest = n - depth - 1
        p2 = tuple(ev(phi((b << (rest + 1)) | ((1 << rest) - 1))))
        if p2 == p1:
            b <<= 1
            continue
        if p2 == p0:
            b = (b << 1) | 1
            continue
        _check_between(p0, p2, p1)
        beta0 = _dual_beta(p2, p0, cfg)
        beta1 = _dual_beta(p1, p2, cfg)
        bit, l = _refine(beta0, beta1, l, src)
        b = (b << 1) | bit
        if bit:
            p0 = p2
        else:
            p1 = p2
    return GenResult(Code(phi(b), n), src.bits_consumed - start)


# ------------------------------------------------------------------ conditional bit sampling

def gen_cbs(F: FiniteCdf, src: BitSource) -> GenResult:
    """Exact draw, one Bernoulli(conditional probability) per output bit."""
    fmt, cfg, ev, phi = F.fmt, F.prob, F.eval, F.fmt.phi
    n = fmt.width
    start = src.bits_consumed
    b = 0
    f0, f1 = 0.0, 1.0
    for depth in range(n):
        rest = n - depth - 1
        f2 = ev(phi((b << (rest + 1)) | ((1 << rest) - 1)))
        if f2 == f1:
            b <<= 1
            continue
        if f2 == f0:
            b = (b << 1) | 1
            continue
        if not f0 < f2 < f1:
            raise SpecViolation(f"CDF value {f2!r} outside ({f0!r}, {f1!r}); not monotone")
        i, k = exact_ratio(f0, f2, f1, cfg)
        z = bernoulli(i, k, src)
        b = (b << 1) | z
        if z:
            f0 = f2
        else:
            f1 = f2
    return GenResult(Code(phi(b), n), src.bits_consumed - start)


def gen_cbs_ddf(G: DualDistFn, src: BitSource) -> GenResult:
    fmt, cfg, ev, phi = G.fmt, G.prob, G.eval, G.fmt.phi
    n = fmt.width
    start = src.bits_consumed
    b = 0
    p0, p1 = (0, 0.0), (1, 0.0)
    for depth in range(n):
        rest = n - depth - 1
        p2 = tuple(ev(phi((b << (rest + 1)) | ((1 << rest) - 1))))
        if p2 == p1:
            b <<= 1
            continue
        if p2 == p0:
            b = (b << 1) | 1
            continue
        _check_between(p0, p2, p1)
        i, k = exact_ratio_ddf(p0, p2, p1, cfg)
        z = bernoulli(i, k, src)
        b = (b << 1) | z
        if z:
            p0 = p2
        else:
            p1 = p2
    return GenResult(Code(phi(b), n), src.bits_consumed - start)


@dataclass
class Sampler:
    """Picks the generator for a spec kind and method name."""

    spec: object
    method: str = "opt"

    def __call__(self, src: BitSource) -> GenResult:
        kind = self.spec.kind
        if kind == "sf":
            raise TypeError("wrap an SF with sf_as_ddf first")
        table = {
            ("cdf", "opt"): gen_opt, ("cdf", "cbs"): gen_cbs,
            ("ddf", "opt"): gen_opt_ddf, ("ddf", "cbs"): gen_cbs_ddf,
        }
        return table[(kind, self.method)](self.spec, src)


class Batch(NamedTuple):
    codes: "np.ndarray"
    flips: "np.ndarray"
    compiled: bool

    @property
    def total_flips(self) -> int:
        return int(self.flips.sum())


def sample(spec, src: BitSource, count: int, method: str = "opt", compiled: bool | None = None) -> Batch:
    """``count`` independent draws.

    Runs the compiled kernel when the spec supports it and ``src`` is a
    PrngSource (the kernel continues the same bit stream), else loops over the
    reference generator. ``compiled=True`` demands the kernel and
    ``compiled=False`` forbids it.
    """
    import numpy as np

    from . import _fast
    from .entropy import PrngSource

    if method not in ("opt", "cbs"):
        raise ValueError(f"method must be opt or cbs, not {method!r}")
    if spec.kind == "sf":
        raise TypeError("wrap an SF with sf_as_ddf first")
    plan = None
    if compiled is not False and isinstance(src, PrngSource):
        plan = _fast.plan(spec)
    if compiled and plan is None:
        raise ValueError(f"no compiled kernel for {getattr(spec, 'name', spec)}")
    if plan is not None:
        codes, flips, status, at = _fast.run(plan, count, method, src)
        if status == _fast.NON_MONOTONE:
            raise SpecViolation(f"spec is not monotone (caught on variate {at})")
        if status == _fast.BAD_DISPATCH:
            raise SpecViolation(f"dual spec asked for the (0, 1) dispatch (variate {at})")
        return Batch(codes, flips, True)
    gen = Sampler(spec, method)
    codes = np.zeros(count, dtype=np.uint64)
    flips = np.zeros(count, dtype=np.int64)
    for j in range(count):
        r = gen(src)
        codes[j], flips[j] = r.code.bits, r.flips
    return Batch(codes, flips, False)
