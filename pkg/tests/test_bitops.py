import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from exactrvg.bitops import (
    F32, F64, BitExtractor, PreconditionError, ProbConfig, ProbFloat, decode,
    exact_difference, extract_bit, preproc_dual, preproc_sub, preproc_sum_complement,
    word_bound_violations,
)
from exactrvg.oracle import rational_digit

P43 = ProbConfig(4, 3)


def beta_value(beta: BitExtractor) -> Fraction:
    """Reassemble the described number from its four segments."""
    n1, n2, n_hi, n_lo, b1, b2, g_hi, g_lo = beta
    v = ((1 << n1) - 1) * b1
    v = (v << n_hi) | g_hi
    v = (v << n2) | (((1 << n2) - 1) * b2)
    v = (v << n_lo) | g_lo
    return Fraction(v, 1 << beta.support)


def test_prob_config_basics():
    assert F64.grain == 1074 and F32.grain == 149 and P43.grain == 9
    assert F32.smallest == 2.0 ** -149
    assert P43.width == 8
    assert P43.round(Fraction(1, 3)) == 0.34375
    assert P43.contains(0.375) and not P43.contains(0.3)
    assert P43.succ(1.0) == 1.125 and P43.pred(1.0) == 0.9375
    assert F32.describe() == "f32" and P43.describe() == "float:E=4,m=3"
    assert P43.scaled(P43.smallest) == 1
    vals = P43.unit_values()
    assert vals[0] == 0.0 and vals[-1] == 1.0 and len(vals) == 57


def test_decode():
    assert decode(1.0, F64) == (0, 1 << 52)
    assert decode(0.75, F64) == (-1, 3 << 51)
    assert decode(5e-324, F64) == (-1022, 1)
    assert decode(0.0, P43) == (-6, 0)


def test_prob_float_check():
    assert ProbFloat(0.5, F32).check().value == 0.5
    with pytest.raises(PreconditionError):
        ProbFloat(0.1, F32).check()
    with pytest.raises(PreconditionError):
        ProbFloat(1.5).check()


def test_preconditions():
    with pytest.raises(PreconditionError):
        preproc_sub(0.25, 0.5)
    with pytest.raises(PreconditionError):
        preproc_sub(1.0, 0.0)
    with pytest.raises(PreconditionError):
        preproc_sum_complement(0.5, 0.5)
    with pytest.raises(PreconditionError):
        preproc_sum_complement(0.75, 0.0)
    with pytest.raises(PreconditionError):
        preproc_dual(0, 0.1, 1, 0.2)


def test_small_example():
    # 0.75 - 0.125 = 0.101 in binary
    beta = preproc_sub(0.75, 0.125)
    assert [extract_bit(beta, l) for l in range(1, 8)] == [1, 0, 1, 0, 0, 0, 0]
    assert beta_value(beta) == Fraction(5, 8)


def _pairs_sub(vals):
    for x in vals:
        for x2 in vals:
            if x > x2 and not (x == 1.0 and x2 == 0.0):
                yield x, x2


def test_exhaustive_sub_emulated():
    vals = P43.unit_values()
    count = 0
    for x, x2 in _pairs_sub(vals):
        beta = preproc_sub(x, x2, P43)
        q = exact_difference(x, x2)
        assert beta_value(beta) == q
        assert [extract_bit(beta, l) for l in range(1, beta.support + 3)] == \
            [rational_digit(q, l) for l in range(1, beta.support + 3)]
        assert word_bound_violations(x, x2, P43) == []
        count += 1
    assert count == 57 * 56 // 2 - 1


def test_exhaustive_sum_complement_emulated():
    vals = [v for v in P43.unit_values() if v <= 0.5]
    for x in vals:
        for x2 in vals:
            if x + x2 == 0 or (x == 0.5 and x2 == 0.5):
                continue
            beta = preproc_sum_complement(x, x2, P43)
            q = 1 - Fraction(x) - Fraction(x2)
            assert beta_value(beta) == q
            assert word_bound_violations(x, x2, P43, complement=True) == []


unit64 = st.floats(0.0, 1.0, allow_nan=False)
half64 = st.floats(0.0, 0.5, allow_nan=False)


@settings(max_examples=500)
@given(unit64, unit64)
def test_sub_binary64(a, b):
    x, x2 = max(a, b), min(a, b)
    assume(x > x2 and not (x == 1.0 and x2 == 0.0))
    beta = preproc_sub(x, x2)
    q = exact_difference(x, x2)
    assert beta_value(beta) == q
    assert beta.support <= 1100
    for l in (1, beta.n1, beta.n1 + 1, beta.support, beta.support + 1):
        if l >= 1:
            assert extract_bit(beta, l) == rational_digit(q, l)
    assert word_bound_violations(x, x2, F64) == []


@settings(max_examples=500)
@given(half64, half64)
def test_sum_complement_binary64(x, x2):
    assume(x + x2 > 0 and not (x == 0.5 and x2 == 0.5))
    beta = preproc_sum_complement(x, x2)
    assert beta_value(beta) == 1 - Fraction(x) - Fraction(x2)
    assert word_bound_violations(x, x2, F64, complement=True) == []


@settings(max_examples=200)
@given(st.integers(1, 2**31 - 1), st.integers(0, 2**31 - 1))
def test_sub_binary32(a, b):
    x, x2 = sorted((F32.from_bits(a) if a <= F32.bits(1.0) else 1.0,
                    F32.from_bits(b) if b <= F32.bits(1.0) else 0.0), reverse=True)
    assume(x > x2 and not (x == 1.0 and x2 == 0.0))
    beta = preproc_sub(x, x2, F32)
    assert beta_value(beta) == exact_difference(x, x2)


@given(st.sampled_from([(0, 0), (1, 1), (1, 0)]), half64, half64)
def test_dual_dispatch(dd, f, f2):
    d, d2 = dd
    if d == 0:
        f, f2 = max(f, f2), min(f, f2)
        assume(f > f2)
    elif d2 == 1:
        f, f2 = min(f, f2), max(f, f2)
        assume(f < f2 and f2 < 0.5)
    else:
        assume(f < 0.5 and f + f2 > 0)
    beta = preproc_dual(d, f, d2, f2)
    gs = (lambda d_, v: 1 - Fraction(v) if d_ else Fraction(v))
    assert beta_value(beta) == gs(d, f) - gs(d2, f2)


def test_word_bound_holds_at_extremes():
    tiny = 5e-324
    for x, x2 in [(1.0, tiny), (tiny * 2, tiny), (0.5, tiny), (1.0, 0.5), (math.nextafter(1.0, 0), 0.0)]:
        assert word_bound_violations(x, x2, F64) == []
    assert word_bound_violations(0.5, tiny, F64, complement=True) == []
