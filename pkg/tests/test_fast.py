"""The compiled kernels must reproduce the reference generators bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exactrvg import _fast
from exactrvg.bitops import F32, F64
from exactrvg.distlib import DistParams, build, catalog, get
from exactrvg.entropy import PrngSource
from exactrvg.formats import FormatSpec, parse_format
from exactrvg.generators import sample

from fixtures import ddf_fixtures, max_entropy, P43

FORMATS = ["f32", "f64", "uint:8", "tc:6", "sm:5", "float:E=4,m=3", "posit:8", "fixed:n=6,m=2,signed=tc"]


@pytest.mark.parametrize("desc", FORMATS)
def test_phi_arrays_match_scalar(desc):
    fmt = parse_format(desc)
    rng = np.random.default_rng(0)
    us = rng.integers(0, fmt.mask, size=500, dtype=np.uint64, endpoint=True)
    cs = _fast.phi_array(fmt, us)
    assert [int(c) for c in cs] == [fmt.phi(int(u)) for u in us]
    assert np.array_equal(_fast.phi_inv_array(fmt, cs), us)


def _same(spec, method, seed, count):
    a, b = PrngSource(seed), PrngSource(seed)
    x = sample(spec, a, count, method, compiled=True)
    y = sample(spec, b, count, method, compiled=False)
    assert np.array_equal(x.codes, y.codes)
    assert np.array_equal(x.flips, y.flips)
    assert a.export().tolist() == b.export().tolist()
    assert a.bits_consumed == b.bits_consumed


CASES = [(name, kind) for name in catalog() for kind in ("cdf", "sf", "ddf")]


@pytest.mark.parametrize("name,kind", CASES)
def test_catalog_kernel_matches_reference(name, kind):
    spec = build(DistParams(name, {}), kind)
    assert _fast.plan(spec) is not None
    for method in ("opt", "cbs"):
        _same(spec, method, seed=11, count=40)


@pytest.mark.parametrize("desc", ["f32", "tc:32", "uint:32"])
def test_other_formats_run_compiled(desc):
    spec = build(DistParams("logistic", {}), "ddf", fmt=desc)
    _same(spec, "opt", seed=3, count=40)


def test_f64_prob_config():
    spec = build(DistParams("exponential", {}), "cdf", prob=F64)
    _same(spec, "opt", seed=2, count=30)
    _same(spec, "cbs", seed=2, count=30)


def test_table_mode_for_small_specs():
    specs = [max_entropy(P43)] + ddf_fixtures()
    for spec in specs:
        assert _fast.plan(spec)["mode"] == _fast.TABLE
        _same(spec, "opt", seed=5, count=200)
        _same(spec, "cbs", seed=5, count=200)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**40), st.sampled_from(["opt", "cbs"]))
def test_kernel_matches_reference_random_seeds(seed, method):
    spec = build(DistParams("cauchy", {}), "ddf")
    _same(spec, method, seed, 20)


def test_batch_eval_matches_scalar():
    for kind in ("cdf", "ddf"):
        spec = build(DistParams("weibull", {"a": 2, "b": 3}), kind)
        args = _fast.plan(spec)
        fmt = spec.fmt
        cs = _fast.phi_array(fmt, np.random.default_rng(1).integers(0, fmt.mask, 300, dtype=np.uint64))
        d, f = _fast.batch_eval(args, cs)
        for c, dd, ff in zip(cs, d, f):
            v = spec.eval(int(c))
            assert (0, v) == (dd, ff) if kind == "cdf" else tuple(v) == (dd, ff)


def test_no_plan_for_untabulable_spec():
    from exactrvg.dist_spec import FiniteCdf

    F = FiniteCdf.create(FormatSpec.uint(24), lambda c: 1.0 if c else 0.5, F32, "big", trusted=True)
    assert _fast.plan(F) is None
    with pytest.raises(ValueError):
        sample(F, PrngSource(0), 1, compiled=True)
