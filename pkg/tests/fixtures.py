"""Small-format distribution fixtures shared by the test modules."""
from __future__ import annotations

from fractions import Fraction

from exactrvg.bitops import ProbConfig
from exactrvg.dist_spec import FiniteCdf, FiniteSf, make_ddf
from exactrvg.formats import FormatSpec

P43 = ProbConfig(4, 3)
P32 = ProbConfig(3, 2)

FIG5A_LEAVES = [6, 12, 13, 9, 10, 12, 6, 1, 1, 2, 13, 8, 14, 13, 7, 10]


def table_cdf(fmt, values, prob, name):
    """CDF over a uint format from a list indexed by code; the tail repeats the last value."""
    vals = list(values)

    def F(c):
        return vals[min(c, len(vals) - 1)]

    return FiniteCdf.create(fmt, F, prob, name)


def dyadic_uniform():
    return FiniteCdf.create(FormatSpec.uint(3), lambda c: (c + 1) / 8, P43, "uniform8")


def dyadic_uniform_sf():
    return FiniteSf.create(FormatSpec.uint(3), lambda c: 1 - (c + 1) / 8, P43, "uniform8-sf")


def point_mass(at=5):
    return FiniteCdf.create(FormatSpec.uint(3), lambda c: 1.0 if c >= at else 0.0, P43, "point")


def two_atom():
    """Masses 5/16 on code 2 and 11/16 on code 6."""
    return table_cdf(FormatSpec.uint(3), [0.0, 0.0, 0.3125, 0.3125, 0.3125, 0.3125, 1.0, 1.0], P43, "two-atom")


def fig5a_cumulative():
    out, s = [], 0
    for w in FIG5A_LEAVES:
        s += w
        out.append(Fraction(s, 137))
    return out


def fig5a_exact():
    """The 137-denominator distribution as an exact-rational CDF (for prefix maps only)."""
    cum = fig5a_cumulative()
    return FiniteCdf(FormatSpec.uint(4), lambda c: cum[c], P43, "fig5a-exact")


def fig5a_rounded(prob=P43):
    """The same distribution with every cumulative value rounded into the probability format."""
    return table_cdf(FormatSpec.uint(4), [prob.round(q) for q in fig5a_cumulative()], prob, "fig5a")


def fig5a_sf(prob=P43):
    return FiniteSf.create(FormatSpec.uint(4), lambda c: prob.round(1 - fig5a_cumulative()[c]), prob, "fig5a-sf")


def max_entropy(prob):
    """F(b) = v_{min(b+1, N)} over the ascending positive values v_1..v_N of prob in (0, 1]."""
    vals = [v for v in prob.unit_values() if v > 0]
    n = max(1, (len(vals) - 1).bit_length())
    return table_cdf(FormatSpec.uint(n), vals, prob, f"maxent{prob.E}{prob.m}")


def ceiling(prob) -> Fraction:
    return prob.m + 2 - Fraction(1, 2 ** ((1 << (prob.E - 1)) - 3))


def all_cdf_fixtures():
    return [dyadic_uniform(), point_mass(), two_atom(), fig5a_rounded(), max_entropy(P32), max_entropy(P43)]


def ddf_fixtures():
    return [make_ddf(dyadic_uniform(), dyadic_uniform_sf()), make_ddf(fig5a_rounded(), fig5a_sf())]
