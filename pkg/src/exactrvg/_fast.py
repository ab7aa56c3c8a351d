"""Compiled bulk sampling.

The kernels here are line-for-line ports of the reference generators in
``generators``: same midpoint walk, same digit extraction, same Bernoulli loop,
same SFC64 bit stream. Given the same source state they produce the same
codes and consume the same bits (the test suite checks this).

Codes and unsigned indices are uint64. Probability floats are held in host
doubles (every value of a format with E <= 11 and m <= 52 is one) and decoded
from the binary64 bit pattern.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from .formats import FormatSpec, Kind

U0 = np.uint64(0)
U1 = np.uint64(1)
U64 = np.uint64(64)

# eval modes
TABLE, CDF, SPLIT, SFDDF, SF = 0, 1, 2, 3, 4
# status codes
OK, NON_MONOTONE, BAD_DISPATCH = 0, 1, 2


def kind_id(fmt: FormatSpec) -> int:
    k = fmt.kind
    if k in (Kind.UINT, Kind.FIXED_U):
        return 0
    if k in (Kind.TWOS, Kind.FIXED_TC, Kind.POSIT):
        return 1
    if k in (Kind.SIGN_MAG, Kind.FIXED_SM):
        return 2
    return 3


# ------------------------------------------------------------------ format order

@nb.njit(cache=True, inline="always")
def _shl(x, s):
    if s >= 64:
        return U0
    return x << np.uint64(s)


@nb.njit(cache=True, inline="always")
def _low(s):
    """(1 << s) - 1 for 0 <= s <= 64."""
    if s >= 64:
        return ~U0
    return (U1 << np.uint64(s)) - U1


@nb.njit(cache=True)
def _phi_sm(b, n):
    hi = U1 << np.uint64(n - 1)
    if b & hi:
        return b ^ hi
    return hi | (~b & (hi - U1))


@nb.njit(cache=True)
def _phi_sm_inv(c, n):
    hi = U1 << np.uint64(n - 1)
    if c & hi:
        return hi - U1 - (c ^ hi)
    return c | hi


@nb.njit(cache=True)
def phi_u(b, kind, n, E, m):
    if kind == 0:
        return b
    if kind == 1:
        return b ^ (U1 << np.uint64(n - 1))
    if kind == 2:
        return _phi_sm(b, n)
    top = _low(E + 1) << np.uint64(m)
    if b <= top:
        return _phi_sm(b + _low(m), n)
    return b


@nb.njit(cache=True)
def phi_inv_u(c, kind, n, E, m):
    if kind == 0:
        return c
    if kind == 1:
        return c ^ (U1 << np.uint64(n - 1))
    if kind == 2:
        return _phi_sm_inv(c, n)
    b = _phi_sm_inv(c, n)
    top = _low(E + 1) << np.uint64(m)
    lm = _low(m)
    if b >= lm and b - lm <= top:
        return b - lm
    return c


@nb.njit(cache=True)
def _phi_many(us, kind, n, E, m, inverse):
    out = np.empty(us.shape[0], dtype=np.uint64)
    for j in range(us.shape[0]):
        out[j] = phi_inv_u(us[j], kind, n, E, m) if inverse else phi_u(us[j], kind, n, E, m)
    return out


def phi_array(fmt: FormatSpec, us: np.ndarray) -> np.ndarray:
    return _phi_many(np.asarray(us, dtype=np.uint64), kind_id(fmt), fmt.width, fmt.E, fmt.m, False)


def phi_inv_array(fmt: FormatSpec, cs: np.ndarray) -> np.ndarray:
    return _phi_many(np.asarray(cs, dtype=np.uint64), kind_id(fmt), fmt.width, fmt.E, fmt.m, True)


@nb.njit(cache=True)
def code_value(c, kind, n, E, m):
    """gamma(c) as a double, for uint, two's complement and IEEE-style kinds."""
    if kind == 0:
        return float(c)
    if kind == 1:
        if c >> np.uint64(n - 1):
            return -float((~c + U1) & _low(n))
        return float(c)
    sign = c >> np.uint64(n - 1)
    e = np.int64((c >> np.uint64(m)) & _low(E))
    fr = c & _low(m)
    if e == (1 << E) - 1:
        if fr != U0:
            return np.nan
        return -np.inf if sign else np.inf
    bias = (1 << (E - 1)) - 1
    mant = fr
    if e > 0:
        mant = fr | (U1 << np.uint64(m))
    x = math.ldexp(float(mant), max(e, 1) - bias - m)
    return -x if sign else x


# ------------------------------------------------------------------ bit source

@nb.njit(cache=True)
def _next_bit(st):
    if st[5] == U64:
        a, b, c, w = st[0], st[1], st[2], st[3]
        tmp = a + b + w
        st[3] = w + U1
        st[0] = b ^ (b >> np.uint64(11))
        st[1] = c + (c << np.uint64(3))
        st[2] = ((c << np.uint64(24)) | (c >> np.uint64(40))) + tmp
        st[4] = tmp
        st[5] = U0
    st[5] += U1
    return np.int64((st[4] >> (U64 - st[5])) & U1)


# ------------------------------------------------------------------ probability digits

@nb.njit(cache=True, inline="always")
def _rnd(v, cE, cm):
    if cE == 8 and cm == 23:
        return float(np.float32(v))
    return v


@nb.njit(cache=True)
def _decode(v, E, m):
    """(e_hat, f) of v in F^E_m, read off the binary64 bit pattern of v."""
    bias = (1 << (E - 1)) - 1
    bits = np.float64(v).view(np.uint64)
    ed = np.int64((bits >> np.uint64(52)) & np.uint64(0x7FF))
    frac = np.int64(bits & np.uint64(0xFFFFFFFFFFFFF))
    if ed == 0 and frac == 0:
        return 1 - bias, np.int64(0)
    if ed > 0:
        ex = ed - 1023
        sig = frac | (np.int64(1) << 52)
    else:
        ex = -1022
        sig = frac
    eh = max(ex, 1 - bias)
    return eh, sig >> (52 - m + eh - ex)


@nb.njit(cache=True)
def _preproc1(x, x2, E, m):
    eh, f = _decode(x, E, m)
    eh2, f2 = _decode(x2, E, m)
    d = eh - eh2
    f2_hi = f2 >> min(d, E + m)
    f2_lo = f2 & ((np.int64(1) << min(d, m + 1)) - 1)
    one = 1 if x == 1.0 else 0
    n_lo = min(d, m + 1)
    b2 = 1 if f2_lo > 0 else 0
    return (-eh - 1 + one, max(d - (m + 1), 0), m + 1 - one, n_lo, 0, b2,
            f - f2_hi - b2, (np.int64(b2) << n_lo) - f2_lo)


@nb.njit(cache=True)
def _preproc2(x, x2, E, m):
    if x < x2:
        x, x2 = x2, x
    eh, f = _decode(x, E, m)
    eh2, f2 = _decode(x2, E, m)
    d = eh - eh2
    f2_hi = f2 >> min(d, E + m)
    f2_lo = f2 & ((np.int64(1) << min(d, m + 1)) - 1)
    half = 1 if x == 0.5 else 0
    n_hi = m + 2 - half
    n_lo = min(d, m + 1)
    b2 = 1 if f2_lo > 0 else 0
    return (-eh - 2 + half, max(d - (m + 1), 0), n_hi, n_lo, 1, b2,
            (np.int64(1) << n_hi) - f - f2_hi - b2, (np.int64(b2) << n_lo) - f2_lo)


@nb.njit(cache=True)
def _dual(d, f, d2, f2, E, m):
    """Digits of G*(d, f) - G*(d2, f2); the flag is False for the forbidden case."""
    if d == 0 and d2 == 0:
        return _preproc1(f, f2, E, m), True
    if d == 1 and d2 == 1:
        return _preproc1(f2, f, E, m), True
    if d == 1 and d2 == 0:
        return _preproc2(f, f2, E, m), True
    return _preproc1(1.0, 0.5, E, m), False


@nb.njit(cache=True)
def _digit(beta, l):
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


@nb.njit(cache=True)
def _lte(d, f, d2, f2):
    if d < d2:
        return True
    if d == d2 and d == 0:
        return f <= f2
    if d == d2 and d == 1:
        return f2 <= f
    return False


# ------------------------------------------------------------------ multi-limb integers

@nb.njit(cache=True)
def _set_scaled(out, d, v, E, m, grain):
    """out <- G*(d, v) * 2**grain."""
    eh, f = _decode(v, E, m)
    out[:] = U0
    sh = eh - m + grain
    q, r = sh // 64, sh % 64
    uf = np.uint64(f)
    out[q] = uf << np.uint64(r)
    if r > 0 and q + 1 < out.shape[0]:
        out[q + 1] = uf >> np.uint64(64 - r)
    if d == 1:
        # (1 << grain) - out
        one = np.zeros_like(out)
        one[grain // 64] = U1 << np.uint64(grain % 64)
        _sub(one, out, out)


@nb.njit(cache=True)
def _sub(a, b, out):
    borrow = U0
    for j in range(a.shape[0]):
        aj, bj = a[j], b[j]
        t = aj - bj
        br = U1 if aj < bj else U0
        t2 = t - borrow
        if t < borrow:
            br = U1
        out[j] = t2
        borrow = br


@nb.njit(cache=True)
def _shl1(a):
    carry = U0
    for j in range(a.shape[0]):
        v = a[j]
        a[j] = (v << U1) | carry
        carry = v >> np.uint64(63)


@nb.njit(cache=True)
def _cmp(a, b):
    for j in range(a.shape[0] - 1, -1, -1):
        if a[j] != b[j]:
            return 1 if a[j] > b[j] else -1
    return 0


@nb.njit(cache=True)
def _bernoulli(i, k, st):
    flips = 0
    while True:
        _shl1(i)
        c = _cmp(i, k)
        if c == 0:
            return _next_bit(st), flips + 1
        b = 0
        if c > 0:
            b = 1
            _sub(i, k, i)
        flips += 1
        if _next_bit(st):
            return b, flips


# ------------------------------------------------------------------ spec evaluation

# not cached: signatures that carry function types do not pickle reliably
@nb.njit
def _eval(u, mode, kind, n, E, m, cE, cm, ucut, cdf, sf, prm, dtab, ftab):
    if mode == TABLE:
        return dtab[u], ftab[u]
    c = phi_u(u, kind, n, E, m)
    x = code_value(c, kind, n, E, m)
    nan = x != x
    if mode == CDF:
        return 0, _rnd(1.0 if nan else cdf(x, prm), cE, cm)
    if mode == SPLIT:
        if u < ucut:
            return 0, _rnd(1.0 if nan else cdf(x, prm), cE, cm)
        return 1, _rnd(0.0 if nan else sf(x, prm), cE, cm)
    s = _rnd(0.0 if nan else sf(x, prm), cE, cm)
    if mode == SF or s < 0.5:
        return 1, s
    return 0, 1.0 - s


@nb.njit
def _batch_eval(us, mode, kind, n, E, m, cE, cm, ucut, cdf, sf, prm):
    cnt = us.shape[0]
    d = np.empty(cnt, dtype=np.int64)
    f = np.empty(cnt, dtype=np.float64)
    dummy_d = np.zeros(1, dtype=np.int64)
    dummy_f = np.zeros(1, dtype=np.float64)
    for j in range(cnt):
        d[j], f[j] = _eval(us[j], mode, kind, n, E, m, cE, cm, ucut, cdf, sf, prm, dummy_d, dummy_f)
    return d, f


# ------------------------------------------------------------------ generators

@nb.njit
def _sample(count, cbs, mode, kind, n, E, m, cE, cm, ucut, d1_init, f1_init,
            cdf, sf, prm, dtab, ftab, st, codes, flips):
    """Fill codes/flips; returns (status, index of the failing variate)."""
    grain = (1 << (cE - 1)) + cm - 2
    L = (grain + 2 + 63) // 64 + 1
    ia = np.zeros(L, dtype=np.uint64)
    ka = np.zeros(L, dtype=np.uint64)
    t0 = np.zeros(L, dtype=np.uint64)
    t1 = np.zeros(L, dtype=np.uint64)
    t2 = np.zeros(L, dtype=np.uint64)
    for j in range(count):
        b = U0
        l = 0
        used = 0
        d0, f0 = 0, 0.0
        d1, f1 = d1_init, f1_init
        for depth in range(n):
            rest = n - depth - 1
            u = _shl(b, rest + 1) | _low(rest)
            d2, f2 = _eval(u, mode, kind, n, E, m, cE, cm, ucut, cdf, sf, prm, dtab, ftab)
            if d2 == d1 and f2 == f1:
                b = b << U1
                continue
            if d2 == d0 and f2 == f0:
                b = (b << U1) | U1
                continue
            if not (_lte(d0, f0, d2, f2) and _lte(d2, f2, d1, f1)):
                return NON_MONOTONE, j
            if cbs:
                _set_scaled(t0, d0, f0, cE, cm, grain)
                _set_scaled(t1, d1, f1, cE, cm, grain)
                _set_scaled(t2, d2, f2, cE, cm, grain)
                _sub(t1, t2, ia)
                _sub(t1, t0, ka)
                bit, fl = _bernoulli(ia, ka, st)
                used += fl
            else:
                beta0, ok0 = _dual(d2, f2, d0, f0, cE, cm)
                beta1, ok1 = _dual(d1, f1, d2, f2, cE, cm)
                if not (ok0 and ok1):
                    return BAD_DISPATCH, j
                bit = -1
                if l > 0:
                    a0 = _digit(beta0, l)
                    a1 = _digit(beta1, l)
                    if a0 == 1 and a1 == 0:
                        bit = 0
                    elif a0 == 0 and a1 == 1:
                        bit = 1
                while bit < 0:
                    x = _next_bit(st)
                    l += 1
                    used += 1
                    if x == 0:
                        if _digit(beta0, l):
                            bit = 0
                    elif _digit(beta1, l):
                        bit = 1
            b = (b << U1) | np.uint64(bit)
            if bit:
                d0, f0 = d2, f2
            else:
                d1, f1 = d2, f2
        codes[j] = phi_u(b, kind, n, E, m)
        flips[j] = used
    return OK, -1


@nb.njit(cache=True)
def _never(x, prm):
    return 0.0


# ------------------------------------------------------------------ drivers

TABLE_MAX_WIDTH = 20


def _host_prob(cfg) -> bool:
    return (cfg.E, cfg.m) in ((8, 23), (11, 52))


def plan(spec):
    """How ``spec`` can run compiled: a dict of kernel arguments, or None."""
    fmt, cfg = spec.fmt, spec.prob
    kind = kind_id(fmt)
    if cfg.E > 11 or cfg.m > 52:
        return None
    args = dict(kind=kind, n=fmt.width, E=fmt.E, m=fmt.m, cE=cfg.E, cm=cfg.m, ucut=U0,
                cdf=_never, sf=_never, prm=np.zeros(1), dtab=np.zeros(1, dtype=np.int64),
                ftab=np.zeros(1))
    if spec.kind == "cdf":
        args.update(d1_init=0, f1_init=1.0)
    else:
        args.update(d1_init=1, f1_init=0.0)
    k = spec.kernel
    fn_ok = k is not None and kind != 2 and _host_prob(cfg)
    if fn_ok and spec.kind == "cdf" and k[0] == "cdf":
        args.update(mode=CDF, cdf=k[1], sf=k[1], prm=k[2])
        return args
    if fn_ok and spec.kind == "ddf" and k[0] == "ddf" and k[1] is not None and k[2] is not None:
        (_, cfn, cprm), (_, sfn, sprm) = k[1], k[2]
        if cprm is sprm or np.array_equal(cprm, sprm):
            args.update(mode=SPLIT, cdf=cfn, sf=sfn, prm=cprm,
                        ucut=np.uint64(fmt.phi_inv(spec.cutoff)))
            return args
    if fn_ok and spec.kind == "ddf" and k[0] == "sfddf" and k[1] is not None:
        args.update(mode=SFDDF, cdf=k[1][1], sf=k[1][1], prm=k[1][2])
        return args
    if fmt.width <= TABLE_MAX_WIDTH and spec.kind in ("cdf", "ddf"):
        size = 1 << fmt.width
        dtab = np.zeros(size, dtype=np.int64)
        ftab = np.zeros(size, dtype=np.float64)
        for u in range(size):
            v = spec.eval(fmt.phi(u))
            d, f = (0, v) if spec.kind == "cdf" else v
            dtab[u], ftab[u] = d, float(f)
            if ftab[u] != f:
                return None
        args.update(mode=TABLE, dtab=dtab, ftab=ftab)
        return args
    return None


def run(args, count: int, method: str, src):
    """Draw ``count`` codes with a prepared plan from a PrngSource.

    Returns (codes, flips, status, failing index).
    """
    st = src.export()
    codes = np.zeros(count, dtype=np.uint64)
    flips = np.zeros(count, dtype=np.int64)
    a = args
    status, at = _sample(count, method == "cbs", a["mode"], a["kind"], a["n"], a["E"], a["m"],
                         a["cE"], a["cm"], a["ucut"], a["d1_init"], a["f1_init"], a["cdf"], a["sf"],
                         a["prm"], a["dtab"], a["ftab"], st, codes, flips)
    done = count if status == OK else at
    src.absorb(st, int(flips[:done].sum()))
    return codes[:done], flips[:done], status, at


def batch_eval(args, codes: np.ndarray):
    """Vectorized (d, f) for function-mode plans."""
    a = args
    us = phi_inv_array_raw(codes, a["kind"], a["n"], a["E"], a["m"])
    return _batch_eval(us, a["mode"], a["kind"], a["n"], a["E"], a["m"], a["cE"], a["cm"],
                       a["ucut"], a["cdf"], a["sf"], a["prm"])


def phi_inv_array_raw(cs, kind, n, E, m):
    return _phi_many(np.asarray(cs, dtype=np.uint64), kind, n, E, m, True)
