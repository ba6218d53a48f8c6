"""Convergent/divergent classification of kappa and bisection for the threshold."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import BracketError, DegenerateLinearizationError, EigenConvergenceError
from .exponents import check_uniqueness_range
from .picard import SolverOptions, Status, schedule_for, solve_minimal, source_term
from .spectrum import EigenOptions, linearized_eigenvalue


@dataclass(frozen=True, eq=False)
class Convergent:
    report: object
    status = "Convergent"


@dataclass(frozen=True)
class Divergent:
    iterations: int
    status = "Divergent"


@dataclass(frozen=True)
class Indeterminate:
    lambda_estimate: float = None
    status = "Indeterminate"


@dataclass(frozen=True)
class ThresholdOptions:
    rel_tol: float = 1e-3
    budget: int = 64
    solver: SolverOptions = field(default_factory=SolverOptions)
    # lambda above 1 + margin on an unfinished iterate hints at subcriticality
    margin: float = 0.05


@dataclass(eq=False)
class ThresholdReport:
    kappa_lo: float
    kappa_hi: float
    trace: list
    evaluations: int
    lambda_at_lo: float = None
    converged: bool = True

    def as_dict(self):
        return {
            "kappa_lo": self.kappa_lo,
            "kappa_hi": self.kappa_hi,
            "kappa_hat": 0.5 * (self.kappa_lo + self.kappa_hi),
            "rel_width": (self.kappa_hi - self.kappa_lo) / self.kappa_lo,
            "evaluations": self.evaluations,
            "lambda_at_lo": self.lambda_at_lo,
            "reached_tolerance": self.converged,
            "trace": [trace_row(k, c) for k, c in self.trace],
        }


def trace_row(kappa, cls):
    row = {"kappa": kappa, "status": cls.status, "iterations": None, "residual": None, "lambda_estimate": None}
    if isinstance(cls, Convergent):
        row["iterations"] = cls.report.iterations
        row["residual"] = cls.report.residual
    elif isinstance(cls, Divergent):
        row["iterations"] = cls.iterations
    else:
        row["lambda_estimate"] = cls.lambda_estimate
    return row


def _lambda_or_none(spec, u):
    try:
        return linearized_eigenvalue(spec, u, EigenOptions(tol=1e-7, max_iter=2000)).lam
    except (DegenerateLinearizationError, EigenConvergenceError, ValueError):
        return None


def classify_kappa(spec, kappa, grid, opts=None, *, j_star=None, source=None):
    opts = opts or SolverOptions()
    rep = solve_minimal(spec, kappa, grid, opts, j_star=j_star, source=source)
    if rep.status is Status.CONVERGED:
        return Convergent(rep)
    if rep.status is Status.DIVERGED:
        return Divergent(rep.iterations)
    lam = None if rep.last_iterate is None else _lambda_or_none(spec, rep.last_iterate)
    return Indeterminate(lam)


def _classify_task(args):
    spec, kappa, grid, opts = args
    return classify_kappa(spec, kappa, grid, opts)


def classify_many(spec, kappas, grid, opts=None, jobs=1):
    """classify_kappa over a list, results in input order."""
    tasks = [(spec, k, grid, opts) for k in kappas]
    if jobs <= 1 or len(tasks) <= 1:
        return [_classify_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_classify_task, tasks))


def bisect_threshold(spec, grid, opts=None, *, start=1.0):
    """Bracket by doubling/halving from ``start`` and bisect on convergent/divergent.

    An Indeterminate midpoint leaves the bracket alone; the next probe goes to
    the upper quarter point when the lambda estimate hints at subcriticality
    and to the lower one otherwise. No kappa is classified twice.
    """
    opts = opts or ThresholdOptions()
    js = schedule_for(spec).j_star
    G = source_term(spec, grid)
    trace = []
    tried = set()

    def classify(k):
        c = classify_kappa(spec, k, grid, opts.solver, j_star=js, source=G)
        trace.append((k, c))
        tried.add(k)
        return c

    lo = hi = None
    lo_rep = None
    c = classify(start)
    if isinstance(c, Convergent):
        lo, lo_rep = start, c.report
    elif isinstance(c, Divergent):
        hi = start
    up = down = start
    while lo is None or hi is None:
        if len(trace) >= opts.budget:
            raise BracketError(f"no bracket within {opts.budget} evaluations")
        if hi is None:
            up *= 2.0
            k = up
        else:
            down *= 0.5
            k = down
        if k == 0.0 or math.isinf(k):
            raise BracketError("bracket search left the floating point range")
        c = classify(k)
        if isinstance(c, Convergent):
            if lo is None or k > lo:
                lo, lo_rep = k, c.report
        elif isinstance(c, Divergent):
            if hi is None or k < hi:
                hi = k

    pending = None
    while (hi - lo) / lo > opts.rel_tol and len(trace) < opts.budget:
        if pending is not None and pending not in tried and lo < pending < hi:
            k, pending = pending, None
        else:
            k = 0.5 * (lo + hi)
            pending = None
        if k in tried or not lo < k < hi:
            break
        c = classify(k)
        if isinstance(c, Convergent):
            lo, lo_rep = k, c.report
        elif isinstance(c, Divergent):
            hi = k
        else:
            lam = c.lambda_estimate
            if lam is not None and lam > 1.0 + opts.margin:
                pending = 0.5 * (k + hi)
            else:
                pending = 0.5 * (lo + k)
    done = (hi - lo) / lo <= opts.rel_tol
    lam = None
    if check_uniqueness_range(spec) and lo_rep is not None:
        lam = _lambda_or_none(spec, lo_rep.u)
    return ThresholdReport(lo, hi, trace, len(trace), lam, done)


def trace_is_monotone(report):
    conv = [k for k, c in report.trace if isinstance(c, Convergent)]
    div = [k for k, c in report.trace if isinstance(c, Divergent)]
    return not conv or not div or max(conv) < min(div)
