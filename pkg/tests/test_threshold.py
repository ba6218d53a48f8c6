import numpy as np
import pytest

from henonlab.errors import BracketError
from henonlab.picard import SolverOptions
from henonlab.radial import UniformBall, symmetric_grid, weighted_sup
from henonlab.threshold import (
    Convergent,
    Divergent,
    Indeterminate,
    ThresholdOptions,
    bisect_threshold,
    classify_kappa,
    classify_many,
    trace_is_monotone,
)


@pytest.fixture(scope="module")
def base(ref, grid):
    return bisect_threshold(ref, grid)


def test_classify_examples(ref, grid):
    assert isinstance(classify_kappa(ref, 1e-4, grid), Convergent)
    assert isinstance(classify_kappa(ref, 1e4, grid), Divergent)


def test_indeterminate_near_fold(ref, grid, base):
    mid = 0.5 * (base.kappa_lo + base.kappa_hi)
    c = classify_kappa(ref, mid, grid, SolverOptions(max_iter=60))
    assert isinstance(c, Indeterminate)
    # the unfinished iterate already sits near the fold
    assert c.lambda_estimate is not None and 0.5 < c.lambda_estimate < 1.5


def test_bracket_and_trace(base):
    assert base.kappa_lo < base.kappa_hi
    assert (base.kappa_hi - base.kappa_lo) / base.kappa_lo <= 1e-3
    assert base.evaluations <= 64 and base.converged
    assert trace_is_monotone(base)
    for k, c in base.trace:
        if k <= base.kappa_lo:
            u = c.report.u
            assert isinstance(c, Convergent)
            assert c.report.residual <= 1e-10 * weighted_sup(u.values, u.grid.nodes, 3)
        if k >= base.kappa_hi:
            assert isinstance(c, Divergent)
    assert 0.85 <= base.lambda_at_lo <= 1.15


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_source_scaling(ref, grid, base, c):
    rep = bisect_threshold(ref.with_mu(UniformBall(1.0, c)), grid)
    for a, b in ((rep.kappa_lo, base.kappa_lo), (rep.kappa_hi, base.kappa_hi)):
        assert a * c == pytest.approx(b, rel=2e-3)


def test_refinement(ref, base):
    rep = bisect_threshold(ref, symmetric_grid(1e4, 2049))
    k1 = 0.5 * (base.kappa_lo + base.kappa_hi)
    k2 = 0.5 * (rep.kappa_lo + rep.kappa_hi)
    assert abs(k2 / k1 - 1) < 1e-2


def test_indeterminate_keeps_bracket(ref, grid):
    # a small iteration budget turns the near-fold probes indeterminate
    opts = ThresholdOptions(rel_tol=1e-4, budget=30, solver=SolverOptions(max_iter=200))
    rep = bisect_threshold(ref, grid, opts)
    assert trace_is_monotone(rep)
    ind = [k for k, c in rep.trace if isinstance(c, Indeterminate)]
    assert ind
    assert len({k for k, _ in rep.trace}) == len(rep.trace)
    assert rep.evaluations <= 30


def test_no_bracket(ref, grid):
    with pytest.raises(BracketError):
        bisect_threshold(ref, grid, ThresholdOptions(budget=2))


def test_classify_many_order(ref, grid):
    ks = [7.0, 1.0, 1e4, 3.0]
    serial = classify_many(ref, ks, grid)
    par = classify_many(ref, ks, grid, jobs=2)
    assert [c.status for c in serial] == ["Divergent", "Convergent", "Divergent", "Convergent"]
    assert [c.status for c in par] == [c.status for c in serial]
    for a, b in zip(serial, par):
        if isinstance(a, Convergent):
            assert np.array_equal(a.report.u.values, b.report.u.values)


def test_report_dict(base):
    d = base.as_dict()
    assert set(d["trace"][0]) == {"kappa", "status", "iterations", "residual", "lambda_estimate"}
    assert d["kappa_lo"] == base.kappa_lo
