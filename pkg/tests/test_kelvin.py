import numpy as np
import pytest

from henonlab.errors import DomainError
from henonlab.kelvin import (
    dual_problem,
    duality_residual,
    intertwining_mismatch,
    kelvin_transform,
    kelvin_transform_raw,
)
from henonlab.picard import SolverOptions, Status, solve_minimal, source_term
from henonlab.potential import ball_potential
from henonlab.radial import (
    ProblemSpec,
    RadialFunction,
    from_callable,
    make_grid,
    natural_norms,
    symmetric_grid,
    weighted_sup,
    zeros,
)

G65 = symmetric_grid(1e3, 65)


def test_examples():
    one = from_callable(G65, np.ones_like, 0.0, 0.0)
    fs = kelvin_transform(one, 3)
    assert np.allclose(fs.values, 1 / G65.nodes, rtol=1e-15)
    assert (fs.head_exp, fs.tail_exp) == (-1.0, -1.0)
    inv = from_callable(G65, lambda r: 1 / r, -1.0, -1.0)
    assert np.allclose(kelvin_transform(inv, 3).values, 1.0, rtol=1e-15)
    assert (kelvin_transform(inv, 3).head_exp, kelvin_transform(inv, 3).tail_exp) == (0.0, 0.0)


def test_involution_exact_and_arithmetic():
    f = from_callable(G65, lambda r: (1 + r) ** -4.3 * (2 + np.sin(r)), 0.0, -4.3)
    for N in (3, 5, 8):
        back = kelvin_transform(kelvin_transform(f, N), N)
        assert back is f
        raw = kelvin_transform_raw(kelvin_transform_raw(f, N), N)
        assert np.max(np.abs(raw.values / f.values - 1)) <= 4 * np.finfo(float).eps
        assert (raw.head_exp, raw.tail_exp) == (f.head_exp, f.tail_exp)


def test_non_symmetric_grid_rejected():
    g = make_grid(1e-3, 1e2, 33)
    with pytest.raises(DomainError):
        kelvin_transform(zeros(g), 3)


@pytest.mark.parametrize("N", [3, 4, 6])
def test_intertwining_ball_and_powers(N):
    g = symmetric_grid(1e4, 1025)
    ind = RadialFunction(g, (g.nodes <= 1).astype(float), 0.0, 0.0)
    assert intertwining_mismatch(ind, N) <= 1e-8
    for s1, s2 in [(0.0, -3.0), (-1.0, -2.5), (0.5, -5.0), (-1.5, -N - 1.0)]:
        f = from_callable(g, lambda r: r**s1 / (1 + r) ** (s1 - s2), s1, s2)
        assert intertwining_mismatch(f, N) <= 1e-8


def test_intertwining_against_closed_form():
    # (Gamma*1_B)# from the closed form, against Gamma*(r^-4 1_B#) computed on the grid
    g = symmetric_grid(1e4, 513)
    N = 3
    lhs = g.nodes ** (2.0 - N) * ball_potential(1.0 / g.nodes, N, 1.0, 4 * np.pi / 3)
    ind = RadialFunction(g, (g.nodes <= 1).astype(float), 0.0, 0.0)
    fs = kelvin_transform_raw(ind, N)
    from henonlab.potential import newtonian_potential

    rhs = newtonian_potential(RadialFunction(g, g.nodes**-4.0 * fs.values, 0.0, fs.tail_exp - 4), N).values
    assert np.max(np.abs(rhs / lhs - 1)) <= 1e-8


def test_dual_problem_coefficients():
    ref = ProblemSpec(3, 5.0)
    dp = dual_problem(ref, natural_norms(ref), 1.0, G65)
    r = G65.nodes
    assert np.allclose(dp.spec_sharp.alpha(r), 1.0)
    assert dp.spec_sharp.a == 0 and dp.spec_sharp.b == 0
    assert (dp.norms_sharp.c, dp.norms_sharp.d) == (0.0, -1.0)
    s5 = ProblemSpec(5, 3.0)
    dp = dual_problem(s5, natural_norms(s5), 1.0, G65)
    assert np.allclose(dp.spec_sharp.alpha(r), r**2, rtol=1e-14)
    small = r[r < 1]
    assert np.max(small ** -dp.spec_sharp.a * dp.spec_sharp.alpha(small)) < np.inf


def test_dual_solve_is_kelvin_of_primal(ref, grid):
    for k in (0.5, 5.0):
        u = solve_minimal(ref, k, grid).u
        dp = dual_problem(ref, natural_norms(ref), k, grid)
        v = solve_minimal(dp.spec_sharp, k, grid).u
        assert weighted_sup(kelvin_transform_raw(v, 3).values - u.values, grid.nodes, 3) < 1e-12


def test_duality_residual(ref, grid):
    tol = SolverOptions().tol
    for k in (1e-3, 1.0, 6.0):
        rep = solve_minimal(ref, k, grid)
        assert rep.status is Status.CONVERGED
        assert duality_residual(ref, k, rep.u) <= 10 * tol
    G = source_term(ref, grid)
    Gs = kelvin_transform_raw(G, 3)
    expect = 0.2 * weighted_sup(Gs.values, grid.nodes, 3)
    assert duality_residual(ref, 0.2, zeros(grid, 0, -1)) == pytest.approx(expect, rel=1e-15)
