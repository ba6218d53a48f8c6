"""Radial Newtonian potential f -> Gamma*f and the source potential Gamma*mu.

By Newton's theorem the spherical mean of Gamma(x-y) over |y| = s is
Gamma(max(|x|, s)), so for radial f

    (Gamma*f)(r) = 1/(N-2) * [ r^{-(N-2)} int_0^r s^{N-1} f ds + int_r^inf s f ds ].

Both integrals are accumulated segment by segment with closed-form power-law
antiderivatives, so pure powers are integrated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, PotentialDivergenceError
from .radial import (
    RadialDensity,
    RadialFunction,
    SourcePotential,
    SphereShell,
    UniformBall,
    gamma_constant,
    unit_ball_volume,
)


@dataclass(frozen=True)
class PotentialOptions:
    include_head: bool = True
    include_tail: bool = True


DEFAULT_OPTIONS = PotentialOptions()


def newtonian_potential(f, N, opts=DEFAULT_OPTIONS):
    if N < 3:
        raise DomainError("Newtonian potential needs N >= 3")
    v = f.values
    if np.any(v < 0):
        raise DomainError("newtonian_potential expects a nonnegative density")
    if opts.include_head and v[0] > 0 and not N + f.head_exp > 0:
        raise PotentialDivergenceError("head", f"need N + head_exp > 0, got head_exp={f.head_exp}")
    if opts.include_tail and v[-1] > 0 and not f.tail_exp + 2 < 0:
        raise PotentialDivergenceError("tail", f"need tail_exp < -2, got tail_exp={f.tail_exp}")
    g = _kernels.backend.potential_nodes(
        f.grid.nodes, v, float(N), f.head_exp, f.tail_exp, opts.include_head, opts.include_tail
    )
    if not np.all(np.isfinite(g)):
        raise PotentialDivergenceError("interior", "non-finite segment integral")
    head = min(f.head_exp + 2.0, 0.0) if v[0] > 0 else 0.0
    tail = max(f.tail_exp + 2.0, -(N - 2.0)) if v[-1] > 0 else -(N - 2.0)
    return RadialFunction(f.grid, g, head, tail)


def ball_potential(r, N, radius, mass):
    """Potential of the uniform ball of given radius and mass, closed form."""
    r = np.asarray(r, dtype=float)
    rho = mass / (unit_ball_volume(N) * radius**N)
    with np.errstate(divide="ignore"):
        inside = rho / (N - 2) * (radius**2 / 2 - r**2 * (0.5 - 1.0 / N))
        outside = mass * gamma_constant(N) * np.where(r > 0, r, 1.0) ** (2.0 - N)
    return np.where(r <= radius, inside, outside)


def shell_potential(r, N, radius, mass):
    r = np.asarray(r, dtype=float)
    return mass * gamma_constant(N) * np.maximum(r, radius) ** (2.0 - N)


def potential_of_measure(mu, N, grid):
    """Gamma*mu on the grid (kappa = 1)."""
    nodes = grid.nodes
    tail = -(N - 2.0)
    if isinstance(mu, UniformBall):
        return RadialFunction(grid, ball_potential(nodes, N, mu.radius, mu.mass), 0.0, tail)
    if isinstance(mu, SphereShell):
        return RadialFunction(grid, shell_potential(nodes, N, mu.radius, mu.mass), 0.0, tail)
    if isinstance(mu, RadialDensity):
        if mu.density.grid is not grid:
            raise DomainError("density must live on the requested grid")
        g = newtonian_potential(mu.density, N)
        return RadialFunction(grid, g.values, g.head_exp, tail)
    if isinstance(mu, SourcePotential):
        if mu.potential.grid is not grid:
            raise DomainError("source potential must live on the requested grid")
        return mu.potential
    raise DomainError(f"unsupported measure {type(mu).__name__}")


def measure_lower_bound_constant(mu, N):
    """C with (Gamma*mu)(x) >= C (1+|x|)^{-N+2} everywhere.

    Uses the mass m of a ball B(0, rho) and |x-y| <= |x| + rho there.
    """
    rho, m = mu.lower_bound_ball(N)
    return m * gamma_constant(N) * max(1.0, rho) ** (2.0 - N)

