from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from exactrvg.oracle import (
    enumerate_ddg, exact_pmf, expansion_period, knuth_yao_cost, ky_cost_of,
    rational_digit, rational_digits, shannon_entropy,
)

from fixtures import dyadic_uniform, fig5a_exact, two_atom


def test_digits_of_68_137():
    # frozen from long division: 68/137 = 0.01111111 0...
    assert rational_digits(Fraction(68, 137), 1, 8) == [0, 1, 1, 1, 1, 1, 1, 1]


def test_units_digit():
    assert rational_digit(1, 0) == 1
    assert rational_digit(Fraction(1, 2), 0) == 0
    assert rational_digit(Fraction(1, 2), 1) == 1
    with pytest.raises(ValueError):
        rational_digit(Fraction(-1, 3), 1)


def test_expansion_period():
    assert expansion_period(Fraction(1, 3)) == (0, [], [0, 1])
    assert expansion_period(Fraction(3, 8)) == (0, [0, 1, 1], [0])
    assert expansion_period(Fraction(1, 6)) == (0, [0], [0, 1])


def test_entropy_value():
    # frozen: -sum p log2 p for {2,3,7,3}/15
    h = shannon_entropy([Fraction(2, 15), Fraction(3, 15), Fraction(7, 15), Fraction(3, 15)])
    assert h == pytest.approx(1.8294732983598407, abs=1e-12)


def test_ky_cost_values():
    assert knuth_yao_cost([Fraction(2, 15), Fraction(3, 15), Fraction(7, 15), Fraction(3, 15)]) == Fraction(16, 5)
    assert ky_cost_of(Fraction(1, 3)) == Fraction(8, 9)
    assert knuth_yao_cost([Fraction(1, 2)] * 2) == 1
    assert knuth_yao_cost([Fraction(1)]) == 0


@given(st.integers(1, 200).flatmap(lambda k: st.tuples(st.integers(1, k - 1) if k > 1 else st.just(1), st.just(k))))
def test_ky_cost_matches_truncated_sum(ik):
    i, k = ik
    q = Fraction(i, k)
    if q >= 1:
        return
    approx = sum(Fraction(l, 1 << l) * rational_digit(q, l) for l in range(1, 400))
    assert 0 <= ky_cost_of(q) - approx < Fraction(1, 1 << 380)


def test_pmf_of_fixtures():
    assert exact_pmf(dyadic_uniform()) == {c: Fraction(1, 8) for c in range(8)}
    assert exact_pmf(two_atom()) == {2: Fraction(5, 16), 6: Fraction(11, 16)}
    pmf = exact_pmf(fig5a_exact())
    assert sum(pmf.values()) == 1 and pmf[0] == Fraction(6, 137)


def test_enumerate_fair_coin_sum():
    # counts flips until the first 1, capped at 5
    def gen(src):
        n = 0
        while n < 5 and src.next_bit() == 0:
            n += 1
        return n

    e = enumerate_ddg(gen, depth=64, keep_inputs=True)
    assert e.outcomes[0] == Fraction(1, 2) and e.outcomes[5] == Fraction(1, 32)
    assert e.total == 1 and e.residual == 0
    assert e.expected_cost == sum(Fraction(k + 1, 2 ** (k + 1)) for k in range(5)) + Fraction(5, 32)
    assert (1,) in e.halting_inputs


def test_enumerate_residual_for_rejection_sampler():
    def gen(src):  # uniform on {0,1,2} by rejection
        while True:
            v = 2 * src.next_bit() + src.next_bit()
            if v < 3:
                return v

    e = enumerate_ddg(gen, depth=20)
    assert e.residual == Fraction(1, 4 ** 10)
    assert all(p == e.outcomes[0] for p in e.outcomes.values())

