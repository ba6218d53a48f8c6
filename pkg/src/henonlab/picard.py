"""Monotone iteration U_j = Gamma*(alpha U_{j-1}^p) + kappa Gamma*mu, the
minimal solution it converges to, the regularity bootstrap schedule and the
small-kappa contraction solver."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NotContractiveError
from .exponents import check_admissible
from .potential import newtonian_potential, potential_of_measure
from .radial import (
    RadialFunction,
    WeightParams,
    decay_weight,
    natural_norms,
    weighted_norm,
    weighted_sup,
)

# ---------------------------------------------------------------------------
# bootstrap schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapSchedule:
    q: float
    c_bar: float
    d_bar: float
    r_star: float
    c_hat: float
    d_hat: float
    r_seq: list
    c_seq: list
    d_seq: list
    j_star: int


def _resonant(r, r_star, N, jmax=10_000):
    step = 2.0 / N - 1.0 / r_star
    inv_r = 1.0 / r
    if step <= 0:
        return inv_r == 0.0
    j = round(inv_r / step)
    return 0 <= j <= jmax and math.isclose(inv_r, j * step, rel_tol=1e-12, abs_tol=1e-15)


def bootstrap_schedule(N, p, r, c, d, a, b, j_star=None):
    """Exponent sequences (r_j, c_j, d_j) after which V_j lies in L^infty_{0,-N+2}.

    r_* is the midpoint of (max{N/2, r/(r-1)}, q), nudged by 1e-3 relative
    steps off the resonant set; with q infinite the midpoint is taken in 1/r.
    c_hat and d_hat are the midpoints of (-2, c_bar) and (d_bar, -2). j_star is
    the smallest j >= 1 past which r_j = inf, c_j = 0, d_j = -N+2; a larger
    value may be requested.
    """
    from .radial import PowerEnvelope, ProblemSpec, SourceNormParams, UniformBall

    spec = ProblemSpec(N, p, PowerEnvelope(1.0, a, 1.0, b), UniformBall(1.0, 1.0))
    rep = check_admissible(spec, SourceNormParams(r, c, d))
    if not rep.admissible:
        bad = ", ".join(ch.text for ch in rep.failed())
        raise DomainError(f"inadmissible exponents: {bad}")
    dv = rep.derived
    q = dv.q
    lower = max(N / 2.0, 1.0 if math.isinf(r) else r / (r - 1.0))
    if math.isinf(q):
        r_star = 2.0 * lower
    else:
        r_star = 0.5 * (lower + q)
    if not math.isinf(r):
        k = 0
        while _resonant(r, r_star, N):
            k += 1
            cand = r_star * (1.0 + 1e-3) ** k
            r_star = cand if cand < q else r_star * (1.0 - 1e-3) ** k
            if k > 1000:
                raise DomainError("could not find a non-resonant r_*")
    c_hat = 0.5 * (-2.0 + dv.c_bar)
    d_hat = 0.5 * (dv.d_bar - 2.0)
    step = 2.0 / N - 1.0 / r_star

    def terms(j):
        inv = max(1.0 / r - j * step, 0.0)
        rj = math.inf if inv == 0.0 else 1.0 / inv
        cj = min(c + j * (c_hat + 2.0), 0.0)
        dj = max(d + j * (d_hat + 2.0), -N + 2.0)
        return rj, cj, dj

    def settled(t):
        return math.isinf(t[0]) and t[1] == 0.0 and t[2] == -N + 2.0

    r_seq, c_seq, d_seq = [], [], []
    j = 0
    first = None
    while True:
        t = terms(j)
        r_seq.append(t[0])
        c_seq.append(t[1])
        d_seq.append(t[2])
        if first is None and j >= 1 and settled(t):
            first = j
        if first is not None and j >= max(first, j_star or 0) + 1:
            break
        j += 1
        if j > 100_000:
            raise DomainError("bootstrap schedule does not settle")
    js = first if j_star is None else max(int(j_star), first)
    return BootstrapSchedule(q, dv.c_bar, dv.d_bar, r_star, c_hat, d_hat, r_seq, c_seq, d_seq, js)


def schedule_for(spec, norms=None, j_star=None):
    norms = norms or natural_norms(spec)
    return bootstrap_schedule(spec.N, spec.p, norms.r, norms.c, norms.d, spec.a, spec.b, j_star=j_star)


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 10_000
    blowup_cap: float = 1e8
    # consecutive non-contracting steps tolerated by contraction_solve
    window: int = 5


@dataclass(frozen=True, eq=False)
class IterationState:
    j: int
    U: RadialFunction
    V: RadialFunction
    kappa: float
    # nonlinear part Gamma*(alpha U_{j-1}^p); V is taken from its increments so
    # that increments far below the rounding level of U keep their digits
    P: np.ndarray = None


@dataclass(eq=False)
class SolveReport:
    status: Status
    iterations: int
    u: RadialFunction = None
    residual: float = math.nan
    sup_weighted_history: list = field(default_factory=list)
    w: RadialFunction = None
    j_star: int = None
    contraction_factor: float = None
    last_iterate: RadialFunction = None

    def summary(self):
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "j_star": self.j_star,
            "contraction_factor": self.contraction_factor,
            "final_weighted_norm": self.sup_weighted_history[-1] if self.sup_weighted_history else None,
        }


def linf_decay_norm(f, N):
    """||f||_{L^infty_{0,-N+2}} over dyadic annuli."""
    return weighted_norm(f, math.inf, WeightParams(0.0, -(N - 2.0)), N)


def nonlinear_term(spec, u):
    """alpha u^p nodewise, with extension exponents a + p*head and b + p*tail."""
    nodes = u.grid.nodes
    vals = np.asarray(spec.alpha(nodes)) * np.maximum(u.values, 0.0) ** spec.p
    return RadialFunction(u.grid, vals, spec.a + spec.p * u.head_exp, spec.b + spec.p * u.tail_exp)


def source_term(spec, grid):
    return potential_of_measure(spec.mu, spec.N, grid)


def seed_state(spec, kappa, grid):
    """State j = -1 with U_{-1} = 0."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    z = RadialFunction(grid, np.zeros(grid.n), 0.0, -(spec.N - 2.0))
    return IterationState(-1, z, z, kappa, None)


def iterate_once(spec, kappa, state, source=None):
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    G = source if source is not None else source_term(spec, state.U.grid)
    if state.j < 0:
        Uv = kappa * G.values
        head, tail = G.head_exp, G.tail_exp
        Pv = np.zeros(G.grid.n)
        Vv = Uv
    else:
        P = newtonian_potential(nonlinear_term(spec, state.U), spec.N)
        Pv = P.values
        Uv = Pv + kappa * G.values
        head = min(P.head_exp, G.head_exp)
        tail = max(P.tail_exp, G.tail_exp)
        Vv = Pv - state.P
    U = RadialFunction(G.grid, Uv, head, tail)
    V = RadialFunction(G.grid, Vv, head, tail)
    return IterationState(state.j + 1, U, V, kappa, Pv)


def iterates(spec, kappa, grid, count):
    """U_0, ..., U_{count-1} as a list of states."""
    G = source_term(spec, grid)
    st = seed_state(spec, kappa, grid)
    out = []
    for _ in range(count):
        st = iterate_once(spec, kappa, st, source=G)
        out.append(st)
    return out


def residual(spec, kappa, u, source=None):
    """Weighted sup of |u - Gamma*(alpha u^p) - kappa Gamma*mu| (1+r)^{N-2}."""
    if np.any(u.values < 0):
        raise DomainError("residual expects u >= 0")
    G = source if source is not None else source_term(spec, u.grid)
    P = newtonian_potential(nonlinear_term(spec, u), spec.N)
    return weighted_sup(u.values - P.values - kappa * G.values, u.grid.nodes, spec.N)


def solve_minimal(spec, kappa, grid, opts=None, *, norms=None, j_star=None, source=None):
    """Iterate from U_{-1} = 0 until the weighted relative change drops below tol.

    Diverged once the L^infty_{0,-N+2} norm passes blowup_cap; Indeterminate
    when max_iter runs out first. On convergence also returns
    w = u - U_{j_star}.
    """
    opts = opts or SolverOptions()
    if j_star is None:
        j_star = schedule_for(spec, norms).j_star
    N = spec.N
    G = source if source is not None else source_term(spec, grid)
    wt = decay_weight(grid.nodes, N)
    st = seed_state(spec, kappa, grid)
    history = []
    U_jstar = None
    for it in range(opts.max_iter):
        st = iterate_once(spec, kappa, st, source=G)
        if st.j == j_star:
            U_jstar = st.U
        vals = st.U.values
        if not np.all(np.isfinite(vals)):
            return SolveReport(Status.DIVERGED, it + 1, sup_weighted_history=history, j_star=j_star)
        norm = linf_decay_norm(st.U, N)
        history.append(norm)
        if norm > opts.blowup_cap:
            return SolveReport(Status.DIVERGED, it + 1, sup_weighted_history=history, j_star=j_star,
                               last_iterate=st.U)
        if st.j >= 1:
            change = float(np.max(np.abs(st.V.values) * wt))
            size = float(np.max(vals * wt))
            if change <= opts.tol * size:
                if U_jstar is None:
                    # converged before reaching j_star: keep iterating is pointless,
                    # the remaining iterates coincide with u to tolerance
                    U_jstar = st.U
                u = st.U
                res = residual(spec, kappa, u, source=G)
                w = u.with_values(u.values - U_jstar.values)
                return SolveReport(Status.CONVERGED, it + 1, u, res, history, w, j_star, last_iterate=u)
    return SolveReport(Status.INDETERMINATE, opts.max_iter, sup_weighted_history=history, j_star=j_star,
                       last_iterate=st.U)


def contraction_solve(spec, kappa, schedule, grid, opts=None, *, source=None):
    """Fixed point of Phi[v] = Gamma*(alpha((v_+ + U_{j*})^p - U_{j*-1}^p)) starting at v = 0.

    Returns u = w + U_{j*}. Raises NotContractiveError when successive
    differences fail to shrink for ``opts.window`` consecutive steps or the
    iterate blows up.
    """
    opts = opts or SolverOptions()
    N, p = spec.N, spec.p
    G = source if source is not None else source_term(spec, grid)
    js = schedule.j_star
    states = iterates(spec, kappa, grid, js + 1)
    U_hi = states[js].U
    U_lo = states[js - 1].U
    nodes = grid.nodes
    alpha = np.asarray(spec.alpha(nodes))
    lower = alpha * U_lo.values**p
    head = spec.a + p * U_hi.head_exp
    tail = spec.b + p * U_hi.tail_exp
    v = np.zeros(grid.n)
    prev_diff = None
    factor = None
    bad = 0
    for it in range(1, opts.max_iter + 1):
        src = alpha * (np.maximum(v, 0.0) + U_hi.values) ** p - lower
        src = np.maximum(src, 0.0)
        Pv = newtonian_potential(RadialFunction(grid, src, head, tail), N).values
        diff = linf_decay_norm(RadialFunction(grid, np.abs(Pv - v), 0.0, -(N - 2.0)), N)
        vnorm = linf_decay_norm(RadialFunction(grid, np.abs(Pv), 0.0, -(N - 2.0)), N)
        if not np.isfinite(vnorm) or vnorm > opts.blowup_cap:
            raise NotContractiveError(kappa, math.inf if factor is None else factor, it)
        if prev_diff is not None and prev_diff > 0:
            factor = diff / prev_diff
            bad = bad + 1 if factor >= 1.0 else 0
            if bad >= opts.window:
                raise NotContractiveError(kappa, factor, it)
        v = Pv
        prev_diff = diff
        unorm = linf_decay_norm(RadialFunction(grid, v + U_hi.values, 0.0, -(N - 2.0)), N)
        if diff <= opts.tol * unorm:
            u = RadialFunction(grid, v + U_hi.values, U_hi.head_exp, U_hi.tail_exp)
            w = RadialFunction(grid, v, 0.0, -(N - 2.0))
            return SolveReport(Status.CONVERGED, it, u, residual(spec, kappa, u, source=G),
                               [unorm], w, js, contraction_factor=factor, last_iterate=u)
    return SolveReport(Status.INDETERMINATE, opts.max_iter, j_star=js, contraction_factor=factor)
