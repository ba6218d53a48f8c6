"""Kelvin transform f#(r) = r^{-(N-2)} f(1/r) and the dual problem

    v = Gamma*(beta v^p) + kappa (Gamma*mu)#,  beta(r) = r^{(N-2)(p-1)-4} alpha(1/r).

On a symmetric grid node i and node n-1-i are reciprocal, so the transform
is a reversal of the values times r^{-(N-2)}; nothing is interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .exponents import check_admissible, dual_closing_inequalities, kelvin_dual_params
from .picard import nonlinear_term
from .potential import newtonian_potential, potential_of_measure
from .radial import (
    KelvinDualCoefficient,
    ProblemSpec,
    RadialFunction,
    SourceNormParams,
    SourcePotential,
    weighted_sup,
)


def _kelvin_values(f, N):
    nodes = f.grid.nodes
    return nodes ** (2.0 - N) * f.values[::-1]


def kelvin_transform(f, N):
    if not f.grid.kelvin_symmetric:
        raise DomainError("Kelvin transform needs a kelvin_symmetric grid")
    memo = f._kelvin_parent
    if memo is not None and memo[1] == N:
        # f was produced by transforming memo[0]; hand the original back
        return memo[0]
    return kelvin_transform_raw(f, N, parent=f)


def kelvin_transform_raw(f, N, parent=None):
    """The arithmetic transform, without the involution shortcut."""
    if not f.grid.kelvin_symmetric:
        raise DomainError("Kelvin transform needs a kelvin_symmetric grid")
    return RadialFunction(
        f.grid,
        _kelvin_values(f, N),
        -(N - 2.0) - f.tail_exp,
        -(N - 2.0) - f.head_exp,
        None if parent is None else (parent, N),
    )


@dataclass(frozen=True, eq=False)
class DualProblem:
    spec_sharp: ProblemSpec
    norms_sharp: SourceNormParams
    kappa: float
    source_sharp: RadialFunction

    @property
    def grid(self):
        return self.source_sharp.grid


def dual_problem(spec, norms, kappa, grid):
    rep = check_admissible(spec, norms)
    if not rep.admissible:
        raise DomainError("dual problem needs admissible data: " + ", ".join(c.text for c in rep.failed()))
    N, p = spec.N, spec.p
    G = potential_of_measure(spec.mu, N, grid)
    G_sharp = kelvin_transform_raw(G, N)
    beta = KelvinDualCoefficient(spec.alpha, N, p)
    spec_sharp = ProblemSpec(N, p, beta, SourcePotential(G_sharp, spec.mu.total_mass(N)))
    dual = kelvin_dual_params(spec, norms)
    ok = dual_closing_inequalities(N, p, dual)
    if not all(ok.values()):
        bad = [k for k, v in ok.items() if not v]
        raise DomainError(f"dual parameters violate {bad}")
    return DualProblem(spec_sharp, SourceNormParams(norms.r, dual.c_sharp, dual.d_sharp), kappa, G_sharp)


def duality_residual(spec, kappa, u, source=None):
    """Weighted defect of u# in the dual integral equation.

    u and u# share the decay class (bounded near 0, r^{-(N-2)} at infinity),
    so the (1+r)^{N-2} weight of the primal residual is used.
    """
    N = spec.N
    if np.any(u.values < 0):
        raise DomainError("duality_residual expects u >= 0")
    G = source if source is not None else potential_of_measure(spec.mu, N, u.grid)
    G_sharp = kelvin_transform_raw(G, N)
    spec_sharp = ProblemSpec(N, spec.p, KelvinDualCoefficient(spec.alpha, N, spec.p), spec.mu)
    v = kelvin_transform_raw(u, N)
    P = newtonian_potential(nonlinear_term(spec_sharp, v), N)
    return weighted_sup(v.values - P.values - kappa * G_sharp.values, u.grid.nodes, N)


def intertwining_mismatch(f, N, interior=0.5):
    """max relative gap between (Gamma*f)# and Gamma*(r^{-4} f#) on the middle nodes.

    ``interior`` is the fraction of log-radius kept around r = 1.
    """
    lhs = kelvin_transform_raw(newtonian_potential(f, N), N)
    fs = kelvin_transform_raw(f, N)
    dens = RadialFunction(f.grid, f.grid.nodes**-4.0 * fs.values, fs.head_exp - 4.0, fs.tail_exp - 4.0)
    rhs = newtonian_potential(dens, N)
    logr = np.abs(np.log(f.grid.nodes))
    keep = logr <= interior * logr.max()
    scale = np.max(np.abs(lhs.values[keep]))
    return float(np.max(np.abs(lhs.values[keep] - rhs.values[keep])) / scale)
