import math

import numpy as np
import pytest
from scipy.integrate import quad

from henonlab.errors import DomainError, NotContractiveError
from henonlab.picard import (
    SolverOptions,
    Status,
    bootstrap_schedule,
    contraction_solve,
    iterate_once,
    iterates,
    linf_decay_norm,
    residual,
    schedule_for,
    seed_state,
    solve_minimal,
    source_term,
)
from henonlab.potential import ball_potential, newtonian_potential, measure_lower_bound_constant
from henonlab.radial import RadialFunction, decay_weight, weighted_sup, zeros


def test_schedule_example_n10():
    s = bootstrap_schedule(10, 2, 12, 0, -2.5, 0, 0)
    assert s.q == 12 and s.d_bar == -2.5 and s.d_hat == -2.25 and s.r_star == 8.5
    assert s.c_bar == 0 and s.c_hat == -1.0
    assert s.r_seq[0] == 12 and s.r_seq[2] == math.inf
    assert all(c == 0 for c in s.c_seq)
    assert s.d_seq[21] > -8 and s.d_seq[22] == -8
    assert s.j_star == 22


def test_schedule_example_r_infinite():
    s = bootstrap_schedule(3, 5, math.inf, 0, -1, 0, 0)
    assert s.j_star == 1
    assert all(r == math.inf for r in s.r_seq)
    assert all(c == 0 for c in s.c_seq) and all(d == -1 for d in s.d_seq)


def test_schedule_options_and_errors():
    assert bootstrap_schedule(10, 2, 12, 0, -2.5, 0, 0, j_star=30).j_star == 30
    assert bootstrap_schedule(10, 2, 12, 0, -2.5, 0, 0, j_star=3).j_star == 22
    with pytest.raises(DomainError):
        bootstrap_schedule(3, 2.5, math.inf, 0, -1, 0, 0)


def test_schedule_settles_and_orders():
    s = bootstrap_schedule(10, 2, 12, 0, -2.5, 0, 0)
    lower = max(10 / 2, 12 / 11)
    assert lower < s.r_star < s.q
    assert s.c_bar >= s.c_hat > -2 and s.d_bar < s.d_hat < -2
    for j in range(s.j_star, len(s.r_seq)):
        assert (s.r_seq[j], s.c_seq[j], s.d_seq[j]) == (math.inf, 0, -8)


def test_non_resonant_nudge():
    # N=4, p=2.5, r=6: the midpoint r_* = 3 gives 2/N - 1/r_* = 1/6 = 1/r exactly
    s = bootstrap_schedule(4, 2.5, 6.0, 0, -2.5, 0, 0)
    step = 2 / 4 - 1 / s.r_star
    k = (1 / 6) / step
    assert abs(k - round(k)) > 1e-6
    assert s.r_star != 3.0 and abs(s.r_star / 3.0 - 1) < 0.01


def test_seed_and_first_step(ref, grid):
    G = source_term(ref, grid)
    st = iterate_once(ref, 0.1, seed_state(ref, 0.1, grid))
    assert st.j == 0 and np.array_equal(st.U.values, 0.1 * G.values)
    with pytest.raises(DomainError):
        iterate_once(ref, 0.0, st)


def test_second_step_against_quadrature(ref):
    from henonlab.radial import symmetric_grid

    g = symmetric_grid(1e4, 8193)
    st = iterate_once(ref, 0.1, iterate_once(ref, 0.1, seed_state(ref, 0.1, g)))
    f = lambda s: s * (0.1 * ball_potential(s, 3, 1.0, 1.0)) ** 5
    tail = quad(f, 1, np.inf, epsabs=0, epsrel=1e-13)[0]
    head = quad(f, 0, 1, epsabs=0, epsrel=1e-13)[0]
    # node r_min = 1e-4 stands in for the origin: the source part is taken at
    # r_min exactly, the nonlinear part is flat there to O(r^2)
    r0 = g.nodes[0]
    assert st.U.values[0] - st.V.values[0] == pytest.approx(0.1 * (3 - r0 * r0) / (8 * math.pi), rel=1e-15)
    assert st.V.values[0] == pytest.approx(head + tail, rel=1e-6)
    assert st.U.values[0] == pytest.approx(0.1 * 3 / (8 * math.pi) + head + tail, rel=1e-8)
    assert np.all(st.U.values >= iterate_once(ref, 0.1, seed_state(ref, 0.1, g)).U.values)


def test_monotone_scheme(ref, grid):
    sts = iterates(ref, 3.0, grid, 30)
    for a, b in zip(sts, sts[1:]):
        assert np.all(b.V.values >= 0)
        assert np.all(b.U.values >= a.U.values * (1 - 1e-12))


def test_small_kappa_perturbation(ref, grid):
    G = source_term(ref, grid).values
    Cs = []
    for k in (1e-1, 1e-2, 1e-3):
        rep = solve_minimal(ref, k, grid)
        assert rep.status is Status.CONVERGED
        assert rep.residual <= SolverOptions().tol * weighted_sup(rep.u.values, grid.nodes, 3)
        Cs.append(np.max(np.abs(rep.u.values - k * G)) / k / k ** (ref.p - 1))
    # first-order dominance: the constant settles as kappa shrinks; at 1e-3 the
    # correction is ~1e-12 of u and only its size, not its digits, survives rounding
    assert Cs[0] == pytest.approx(Cs[1], rel=1e-3)
    assert Cs[2] <= 1.01 * Cs[1]


def test_large_kappa_diverges(ref, grid):
    rep = solve_minimal(ref, 1e3, grid)
    assert rep.status is Status.DIVERGED and rep.u is None


def test_indeterminate_with_tiny_budget(ref, grid):
    rep = solve_minimal(ref, 6.0, grid, SolverOptions(max_iter=5))
    assert rep.status is Status.INDETERMINATE and rep.iterations == 5


def test_lower_bound(ref, grid):
    C = measure_lower_bound_constant(ref.mu, 3)
    for k in (1e-3, 1.0, 5.0):
        u = solve_minimal(ref, k, grid).u.values
        assert np.all(u >= C * k * (1 + grid.nodes) ** -1.0)


def test_residual_examples(ref, grid):
    k = 0.3
    G = source_term(ref, grid)
    assert residual(ref, k, zeros(grid, 0, -1)) == pytest.approx(k * weighted_sup(G.values, grid.nodes, 3), rel=1e-15)
    u = G.scaled(k)
    P = newtonian_potential(RadialFunction(grid, u.values**5, 0, -5), 3)
    assert residual(ref, k, u) == pytest.approx(weighted_sup(P.values, grid.nodes, 3), rel=1e-12)
    with pytest.raises(DomainError):
        residual(ref, k, u.scaled(-1))


def test_monotone_in_kappa(ref, grid):
    reps = [solve_minimal(ref, k, grid) for k in (0.5, 2.0, 5.0, 6.2)]
    for a, b in zip(reps, reps[1:]):
        assert np.all(a.u.values <= b.u.values)
        assert np.all(a.w.values <= b.w.values + 1e-15)


def test_norm_growth_linear_in_kappa(ref, grid):
    for k in (1e-2, 1.0):
        sts = iterates(ref, k, grid, 10)
        norms = [linf_decay_norm(s.U, 3) for s in sts]
        C = max(norms) / k
        assert C < 1.0


def test_contraction_matches_picard(ref, grid):
    sch = schedule_for(ref)
    for k in (1e-3, 1.0):
        a = contraction_solve(ref, k, sch, grid)
        b = solve_minimal(ref, k, grid)
        assert a.status is Status.CONVERGED
        assert weighted_sup(a.u.values - b.u.values, grid.nodes, 3) <= 1e-8
        assert np.all(a.w.values >= 0)


def test_contraction_fails_past_threshold(ref, grid):
    with pytest.raises(NotContractiveError):
        contraction_solve(ref, 50.0, schedule_for(ref), grid)


def test_summary_fields(ref, grid):
    s = solve_minimal(ref, 1.0, grid).summary()
    assert s["status"] == "Converged" and s["j_star"] == 1 and s["iterations"] > 1
