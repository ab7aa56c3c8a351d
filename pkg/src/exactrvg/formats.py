"""Binary number formats: n-bit codes, their values, and the order bijection phi.

A format is a triple (n, gamma, phi). ``gamma`` maps an n-bit code to an
extended real and ``phi`` is a bijection on n-bit strings such that walking
the unsigned integers 0, 1, ..., 2**n - 1 through ``phi`` visits codes in
nondecreasing value order. Everything that needs "the next larger code"
(quantiles, successor, the generators) goes through ``phi``.
"""
from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Union

__all__ = [
    "Kind", "FormatSpec", "Code", "ExtendedReal", "NEG_INF", "POS_INF", "BOTTOM",
    "gamma", "phi", "phi_inv", "succ_fmt", "pred_fmt", "compare_fmt",
    "parse_format", "float_bits_round", "float_bits_value", "encode_float",
    "FormatError",
]


class FormatError(ValueError):
    """Bad format parameters, bad descriptor, or a step off the end of a format."""


# ---------------------------------------------------------------- values

@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A real number, -inf, +inf, or the maximal NaN bucket ``bottom``."""

    tag: str  # "finite" | "-inf" | "+inf" | "bottom"
    value: Union[Fraction, float, None] = None

    _RANK = {"-inf": 0, "finite": 1, "+inf": 2, "bottom": 3}

    @staticmethod
    def finite(v) -> "ExtendedReal":
        return ExtendedReal("finite", v)

    @property
    def is_finite(self) -> bool:
        return self.tag == "finite"

    def _key(self):
        r = self._RANK[self.tag]
        return (r, self.value if r == 1 else 0)

    def __lt__(self, other: "ExtendedReal") -> bool:
        return self._key() < other._key()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __float__(self) -> float:
        if self.tag == "finite":
            return float(self.value)
        return {"-inf": -math.inf, "+inf": math.inf}.get(self.tag, math.nan)

    def __repr__(self) -> str:
        if self.tag == "finite":
            return f"Finite({self.value})"
        return {"-inf": "NegInf", "+inf": "PosInf", "bottom": "Bottom"}[self.tag]


NEG_INF = ExtendedReal("-inf")
POS_INF = ExtendedReal("+inf")
BOTTOM = ExtendedReal("bottom")


# ---------------------------------------------------------------- formats

class Kind(Enum):
    UINT = "uint"
    SIGN_MAG = "sm"
    TWOS = "tc"
    FIXED_U = "fixed_u"
    FIXED_SM = "fixed_sm"
    FIXED_TC = "fixed_tc"
    FLOAT = "float"
    POSIT = "posit"


@dataclass(frozen=True)
class FormatSpec:
    """An n-bit binary number format (n <= 64).

    ``offset`` is the binary-point position of fixed-point kinds (value is the
    integer reading times 2**-offset). ``E`` and ``m`` are the exponent and
    fraction widths of float kinds.
    """

    kind: Kind
    width: int
    E: int = 0
    m: int = 0
    offset: int = 0

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise FormatError(f"width must be in [1, 64], got {self.width}")
        if self.kind is Kind.FLOAT:
            if self.E < 1 or self.m < 1:
                raise FormatError("float formats need E >= 1 and m >= 1")
            if self.width != 1 + self.E + self.m:
                raise FormatError("float width must equal 1 + E + m")
        if self.kind is Kind.POSIT and self.width < 3:
            raise FormatError("posits need at least 3 bits")
        if self.kind in (Kind.SIGN_MAG, Kind.TWOS, Kind.FIXED_SM, Kind.FIXED_TC) and self.width < 2:
            raise FormatError("signed formats need at least 2 bits")

    # constructors
    @staticmethod
    def uint(n: int) -> "FormatSpec":
        return FormatSpec(Kind.UINT, n)

    @staticmethod
    def sign_magnitude(n: int) -> "FormatSpec":
        return FormatSpec(Kind.SIGN_MAG, n)

    @staticmethod
    def twos_complement(n: int) -> "FormatSpec":
        return FormatSpec(Kind.TWOS, n)

    @staticmethod
    def fixed(n: int, m: int, signed: str = "no") -> "FormatSpec":
        kind = {"no": Kind.FIXED_U, "sm": Kind.FIXED_SM, "tc": Kind.FIXED_TC}[signed]
        return FormatSpec(kind, n, offset=m)

    @staticmethod
    def ieee(E: int, m: int) -> "FormatSpec":
        return FormatSpec(Kind.FLOAT, 1 + E + m, E=E, m=m)

    @staticmethod
    def posit(n: int) -> "FormatSpec":
        return FormatSpec(Kind.POSIT, n)

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def is_host_float(self) -> bool:
        return self.kind is Kind.FLOAT and (self.E, self.m) in ((8, 23), (11, 52))

    @property
    def bias(self) -> int:
        return (1 << (self.E - 1)) - 1

    def describe(self) -> str:
        k = self.kind
        if k is Kind.FLOAT:
            if (self.E, self.m) == (8, 23):
                return "f32"
            if (self.E, self.m) == (11, 52):
                return "f64"
            return f"float:E={self.E},m={self.m}"
        if k is Kind.UINT:
            return f"uint:{self.width}"
        if k is Kind.SIGN_MAG:
            return f"sm:{self.width}"
        if k is Kind.TWOS:
            return f"tc:{self.width}"
        if k is Kind.POSIT:
            return f"posit:{self.width}"
        signed = {Kind.FIXED_U: "no", Kind.FIXED_SM: "sm", Kind.FIXED_TC: "tc"}[k]
        return f"fixed:n={self.width},m={self.offset},signed={signed}"

    def __str__(self) -> str:
        return self.describe()

    # the three maps, on plain ints
    def phi(self, b: int) -> int:
        k, n = self.kind, self.width
        if k in (Kind.UINT, Kind.FIXED_U):
            return b
        if k in (Kind.TWOS, Kind.FIXED_TC, Kind.POSIT):
            return b ^ (1 << (n - 1))
        if k in (Kind.SIGN_MAG, Kind.FIXED_SM):
            return _phi_sm(b, n)
        # float: shift the negative half so that both zeros and every NaN
        # land where the value order wants them
        top = ((1 << (self.E + 1)) - 1) << self.m  # 1 1^E 0^m
        if b <= top:
            return _phi_sm(b + (1 << self.m) - 1, n)
        return b

    def phi_inv(self, c: int) -> int:
        k, n = self.kind, self.width
        if k in (Kind.UINT, Kind.FIXED_U):
            return c
        if k in (Kind.TWOS, Kind.FIXED_TC, Kind.POSIT):
            return c ^ (1 << (n - 1))
        if k in (Kind.SIGN_MAG, Kind.FIXED_SM):
            return _phi_sm_inv(c, n)
        b = _phi_sm_inv(c, n) - ((1 << self.m) - 1)
        top = ((1 << (self.E + 1)) - 1) << self.m
        if 0 <= b <= top:
            return b
        return c

    def value(self, c: int, exact: bool | None = None) -> ExtendedReal:
        """gamma(c). Exact Fractions unless this is a host float format."""
        if exact is None:
            exact = not self.is_host_float
        k, n = self.kind, self.width
        if k is Kind.FLOAT:
            if not exact and self.is_host_float:
                x = _host_float(c, self.E)
                if math.isnan(x):
                    return BOTTOM
                if math.isinf(x):
                    return POS_INF if x > 0 else NEG_INF
                return ExtendedReal.finite(x + 0.0)
            v = float_bits_value(c, self.E, self.m)
            return v if exact or not v.is_finite else ExtendedReal.finite(float(v.value))
        if k is Kind.POSIT:
            v = _posit_value(c, n)
            return v if exact or not v.is_finite else ExtendedReal.finite(float(v.value))
        if k in (Kind.UINT, Kind.FIXED_U):
            v = c
        elif k in (Kind.SIGN_MAG, Kind.FIXED_SM):
            mag = c & ((1 << (n - 1)) - 1)
            v = -mag if c >> (n - 1) else mag
        else:
            v = c - (1 << n) if c >> (n - 1) else c
        if k in (Kind.FIXED_U, Kind.FIXED_SM, Kind.FIXED_TC):
            v = Fraction(v, 1 << self.offset) if self.offset >= 0 else Fraction(v << -self.offset)
            return ExtendedReal.finite(v if exact else float(v))
        return ExtendedReal.finite(Fraction(v) if exact else v)

    def to_float(self, c: int) -> float:
        """gamma(c) as a host float (NaN for bottom)."""
        if self.is_host_float:
            return _host_float(c, self.E)
        return float(self.value(c))


def _phi_sm(b: int, n: int) -> int:
    hi = 1 << (n - 1)
    if b & hi:
        return b ^ hi
    return hi | (~b & (hi - 1))


def _phi_sm_inv(c: int, n: int) -> int:
    hi = 1 << (n - 1)
    if c & hi:
        return hi - 1 - (c ^ hi)
    return c | hi


def _host_float(c: int, E: int) -> float:
    if E == 8:
        return struct.unpack("<f", struct.pack("<I", c))[0]
    return struct.unpack("<d", struct.pack("<Q", c))[0]


def _posit_value(c: int, n: int) -> ExtendedReal:
    if c == 0:
        return ExtendedReal.finite(Fraction(0))
    if c == 1 << (n - 1):
        return NEG_INF
    s = c >> (n - 1)
    bits = [(c >> (n - 2 - i)) & 1 for i in range(n - 1)]
    b1 = bits[0]
    k = 1
    while k < len(bits) and bits[k] == b1:
        k += 1
    rest = bits[k + 1:]  # skip the terminator (absent when the run hits the end)
    e = 0
    for i in range(2):
        e = 2 * e + (rest[i] if i < len(rest) else 0)
    frac_bits = rest[2:]
    f = Fraction(0)
    for i, bit in enumerate(frac_bits):
        if bit:
            f += Fraction(1, 2 ** (i + 1))
    regime = -k if b1 == 0 else k - 1
    expo = (1 - 2 * s) * (4 * regime + e + s)
    scale = Fraction(2) ** expo
    return ExtendedReal.finite(((1 - 3 * s) + f) * scale)


# ---------------------------------------------------------------- float bit helpers

def float_bits_value(bits: int, E: int, m: int) -> ExtendedReal:
    """Exact value of an IEEE-style (1+E+m)-bit pattern."""
    s = bits >> (E + m)
    e = (bits >> m) & ((1 << E) - 1)
    f = bits & ((1 << m) - 1)
    bias = (1 << (E - 1)) - 1
    if e == (1 << E) - 1:
        if f:
            return BOTTOM
        return NEG_INF if s else POS_INF
    if e == 0:
        v = Fraction(f) * Fraction(2) ** (1 - bias - m)
    else:
        v = Fraction((1 << m) + f) * Fraction(2) ** (e - bias - m)
    return ExtendedReal.finite(-v if s else v)


def float_bits_round(x, E: int, m: int) -> int:
    """Round a real (Fraction, int, or float) to the nearest (1+E+m)-bit float, ties to even.

    Overflow goes to infinity. Negative zero is produced only for a negative
    float input equal to -0.0.
    """
    if isinstance(x, float):
        if math.isnan(x):
            return (((1 << E) - 1) << m) | (1 << (m - 1))
        if math.isinf(x):
            return ((1 << E) - 1) << m | ((1 << (E + m)) if x < 0 else 0)
        neg = math.copysign(1.0, x) < 0
        q = Fraction(x)
    else:
        q = Fraction(x)
        neg = q < 0
    sign = (1 << (E + m)) if neg else 0
    q = abs(q)
    if q == 0:
        return sign
    bias = (1 << (E - 1)) - 1
    emin = 1 - bias
    # unbiased exponent of q
    u = q.numerator.bit_length() - q.denominator.bit_length()
    if Fraction(2) ** u > q:
        u -= 1
    u = max(u, emin)
    scaled = q / Fraction(2) ** (u - m)  # significand scaled to m fraction bits
    n_int = scaled.numerator // scaled.denominator
    rem = scaled - n_int
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and n_int & 1):
        n_int += 1
    if n_int >= (1 << (m + 1)):
        n_int >>= 1
        u += 1
    if n_int < (1 << m):  # subnormal (or rounded up into the min normal)
        return sign | n_int
    e = u + bias
    if e >= (1 << E) - 1:
        return sign | (((1 << E) - 1) << m)
    return sign | (e << m) | (n_int - (1 << m))


def encode_float(fmt: FormatSpec, x) -> int:
    """Code of the float in ``fmt`` nearest to ``x`` (ties to even)."""
    if fmt.kind is not Kind.FLOAT:
        raise FormatError("encode_float needs a float format")
    if fmt.is_host_float and isinstance(x, float):
        if fmt.E == 8:
            return struct.unpack("<I", struct.pack("<f", x))[0]
        return struct.unpack("<Q", struct.pack("<d", x))[0]
    return float_bits_round(x, fmt.E, fmt.m)


# ---------------------------------------------------------------- codes and the public ops

@dataclass(frozen=True)
class Code:
    """An n-bit string; ``bits`` holds it in the low ``width`` bits."""

    bits: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise FormatError("code width must be in [1, 64]")
        if self.bits < 0 or self.bits >> self.width:
            raise FormatError(f"bits {self.bits:#x} do not fit in {self.width} bits")

    @staticmethod
    def from_str(s: str) -> "Code":
        return Code(int(s, 2), len(s))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.width}b")

    def hex(self) -> str:
        return "0x" + format(self.bits, f"0{(self.width + 3) // 4}x")


def _bits(fmt: FormatSpec, c) -> int:
    if isinstance(c, Code):
        if c.width != fmt.width:
            raise FormatError(f"code width {c.width} != format width {fmt.width}")
        return c.bits
    if c < 0 or c >> fmt.width:
        raise FormatError(f"code {c} out of range for width {fmt.width}")
    return c


def gamma(fmt: FormatSpec, c, exact: bool | None = None) -> ExtendedReal:
    return fmt.value(_bits(fmt, c), exact)


def phi(fmt: FormatSpec, c) -> Code:
    return Code(fmt.phi(_bits(fmt, c)), fmt.width)


def phi_inv(fmt: FormatSpec, c) -> Code:
    return Code(fmt.phi_inv(_bits(fmt, c)), fmt.width)


def succ_fmt(fmt: FormatSpec, c) -> Code:
    u = fmt.phi_inv(_bits(fmt, c))
    if u == fmt.mask:
        raise FormatError("successor of the maximal code")
    return Code(fmt.phi(u + 1), fmt.width)


def pred_fmt(fmt: FormatSpec, c) -> Code:
    u = fmt.phi_inv(_bits(fmt, c))
    if u == 0:
        raise FormatError("predecessor of the minimal code")
    return Code(fmt.phi(u - 1), fmt.width)


def compare_fmt(fmt: FormatSpec, c, c2) -> int:
    """-1, 0 or 1 as c is below, equal to, or above c2 in the format order."""
    a = fmt.phi_inv(_bits(fmt, c))
    b = fmt.phi_inv(_bits(fmt, c2))
    return (a > b) - (a < b)


# ---------------------------------------------------------------- descriptors

_KV = re.compile(r"(\w+)=([\w.+-]+)")


def parse_format(desc: str) -> FormatSpec:
    """Parse ``f32``, ``f64``, ``float:E=5,m=2``, ``uint:8``, ``sm:8``, ``tc:8``,
    ``posit:16`` or ``fixed:n=16,m=8,signed=sm``."""
    d = desc.strip().lower()
    if d in ("f32", "float32", "binary32"):
        return FormatSpec.ieee(8, 23)
    if d in ("f64", "float64", "binary64", "double"):
        return FormatSpec.ieee(11, 52)
    head, _, tail = d.partition(":")
    try:
        if head in ("uint", "u"):
            return FormatSpec.uint(int(tail))
        if head in ("sm", "int_sm"):
            return FormatSpec.sign_magnitude(int(tail))
        if head in ("tc", "int", "int_tc"):
            return FormatSpec.twos_complement(int(tail))
        if head == "posit":
            return FormatSpec.posit(int(tail))
        kv = dict(_KV.findall(tail))
        if head == "float":
            return FormatSpec.ieee(int(kv["e"]), int(kv["m"]))
        if head == "fixed":
            return FormatSpec.fixed(int(kv["n"]), int(kv.get("m", 0)), kv.get("signed", "no"))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad format descriptor {desc!r}: {exc}") from None
    raise FormatError(f"unknown format descriptor {desc!r}")

