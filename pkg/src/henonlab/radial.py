"""Log-spaced radial grids, radial functions, coefficients, measures and
the weighted annulus norms ``||f||_{L^q_{beta,gamma}}``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .errors import DomainError

MIN_NODES = 3


def unit_ball_volume(N):
    """Volume omega_N of the unit ball in R^N."""
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def gamma_constant(N):
    """Normalization 1/(N(N-2)omega_N) of the Newtonian kernel."""
    return 1.0 / (N * (N - 2) * unit_ball_volume(N))


# ---------------------------------------------------------------------------
# grids and functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    kelvin_symmetric: bool = False

    @property
    def r_min(self):
        return float(self.nodes[0])

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def n(self):
        return int(self.nodes.shape[0])

    @property
    def log_step(self):
        return math.log(self.r_max / self.r_min) / (self.n - 1)

    def __repr__(self):
        kind = "symmetric" if self.kelvin_symmetric else "plain"
        return f"RadialGrid({self.r_min:.4g}..{self.r_max:.4g}, n={self.n}, {kind})"


def make_grid(r_min, r_max, n, kelvin_symmetric=False):
    """Geometric grid from ``r_min`` to ``r_max`` with ``n`` nodes.

    With ``kelvin_symmetric`` the lower end is forced to ``1/r_max`` (pass
    ``r_min=None``), ``n`` must be odd so that r=1 is a node, and node i is
    the reciprocal of node n-1-i.
    """
    n = int(n)
    if n < MIN_NODES:
        raise DomainError(f"grid needs at least {MIN_NODES} nodes, got {n}")
    if r_max is None or not r_max > 0:
        raise DomainError("r_max must be positive")
    if kelvin_symmetric:
        if not r_max > 1.0:
            raise DomainError("symmetric grids need r_max > 1")
        if r_min is not None and not math.isclose(r_min * r_max, 1.0, rel_tol=1e-12):
            raise DomainError("symmetric grids need r_min = 1/r_max")
        if n % 2 == 0:
            raise DomainError("symmetric grids need an odd node count so that r=1 is a node")
        m = (n - 1) // 2
        t = math.log(r_max) * np.arange(1, m + 1) / m
        upper = np.exp(t)
        upper[-1] = r_max
        nodes = np.concatenate((1.0 / upper[::-1], [1.0], upper))
    else:
        if r_min is None or not 0 < r_min < r_max:
            raise DomainError(f"need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}")
        t = np.linspace(math.log(r_min), math.log(r_max), n)
        nodes = np.exp(t)
        nodes[0], nodes[-1] = r_min, r_max
    nodes.setflags(write=False)
    return RadialGrid(nodes=nodes, kelvin_symmetric=bool(kelvin_symmetric))


def symmetric_grid(r_max, n):
    return make_grid(None, r_max, n, kelvin_symmetric=True)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Node values on a grid plus power-law extensions below and above it."""

    grid: RadialGrid
    values: np.ndarray
    head_exp: float = 0.0
    tail_exp: float = 0.0
    # set by kelvin_transform so that transforming twice hands back the original
    _kelvin_parent: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "head_exp", float(self.head_exp))
        object.__setattr__(self, "tail_exp", float(self.tail_exp))

    @property
    def nodes(self):
        return self.grid.nodes

    def __call__(self, r):
        return _kernels.backend.evaluate(self.grid.nodes, self.values, self.head_exp, self.tail_exp, r)

    def with_values(self, values, head_exp=None, tail_exp=None):
        return RadialFunction(
            self.grid,
            values,
            self.head_exp if head_exp is None else head_exp,
            self.tail_exp if tail_exp is None else tail_exp,
        )

    def scaled(self, c):
        return self.with_values(c * self.values)

    def power(self, q):
        """``|f|**q`` with exponents scaled accordingly."""
        return RadialFunction(self.grid, np.abs(self.values) ** q, q * self.head_exp, q * self.tail_exp)

    def is_nonnegative(self):
        return bool(np.all(self.values >= 0))


def from_callable(grid, fn, head_exp=0.0, tail_exp=0.0):
    return RadialFunction(grid, np.asarray(fn(grid.nodes), dtype=float), head_exp, tail_exp)


def solution_like(grid, values, N):
    """Radial function with the default solution extensions (constant head, r^{-(N-2)} tail)."""
    return RadialFunction(grid, values, 0.0, -(N - 2.0))


def zeros(grid, head_exp=0.0, tail_exp=0.0):
    return RadialFunction(grid, np.zeros(grid.n), head_exp, tail_exp)


def decay_weight(nodes, N):
    """Nodewise weight (1+r)^{N-2} of the L^infty_{0,-N+2} topology."""
    return (1.0 + nodes) ** (N - 2)


def weighted_sup(values, nodes, N):
    return float(np.max(np.abs(values) * decay_weight(nodes, N)))


# ---------------------------------------------------------------------------
# weights and norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightParams:
    beta: float
    gamma: float


def omega(w, R):
    """Two-branch weight R^beta on (0,1], R^gamma beyond."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise DomainError("omega needs R > 0")
    out = np.where(R <= 1.0, R ** w.beta, R ** w.gamma)
    return float(out) if out.ndim == 0 else out


def dyadic_radii(grid):
    """Radii R = 2^k with 2*r_min <= R <= r_max."""
    k_lo = math.ceil(math.log2(2.0 * grid.r_min) - 1e-12)
    k_hi = math.floor(math.log2(grid.r_max) + 1e-12)
    k = np.arange(k_lo, k_hi + 1)
    R = np.ldexp(1.0, k)
    return R[(R >= 2.0 * grid.r_min * (1 - 1e-14)) & (R <= grid.r_max * (1 + 1e-14))]


def annulus_lq(f, q, N, R):
    """``||f||_{L^q(A(0,R))}`` for each radius in ``R`` (A = B(0,R) minus B(0,R/2))."""
    R = np.asarray(R, dtype=float)
    lo = R / 2.0
    be = _kernels.backend
    if math.isinf(q):
        return be.annulus_max(f.grid.nodes, np.abs(f.values), f.head_exp, f.tail_exp, lo, R)
    g = f.power(q)
    I = be.annulus_moments(g.grid.nodes, g.values, g.head_exp, g.tail_exp, lo, R, N - 1.0)
    return (N * unit_ball_volume(N) * I) ** (1.0 / q)


def weighted_norm(f, q, w, N, radii=None):
    """Dyadic version of sup_R R^{-N/q} ||f||_{L^q(A(0,R))} / omega_{beta,gamma}(R)."""
    if not q >= 1:
        raise DomainError(f"weighted_norm needs q >= 1, got {q}")
    R = dyadic_radii(f.grid) if radii is None else np.asarray(radii, dtype=float)
    if not np.any(f.values):
        return 0.0
    L = annulus_lq(f, q, N, R)
    scale = 1.0 if math.isinf(q) else R ** (-N / q)
    return float(np.max(scale * L / omega(w, R)))


# ---------------------------------------------------------------------------
# coefficients alpha(r)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerEnvelope:
    """alpha(r) = A0 r^a for r <= 1 and Ainf r^b for r > 1.

    A0 != Ainf gives a jump at r=1; only the envelopes matter for the theory.
    """

    A0: float = 1.0
    a: float = 0.0
    Ainf: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not (self.A0 > 0 and self.Ainf > 0):
            raise DomainError("PowerEnvelope amplitudes must be positive")
        if not self.a > -2:
            raise DomainError(f"coefficient exponent near the origin must satisfy a > -2, got a={self.a}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= 1.0, self.A0 * r ** self.a, self.Ainf * r ** self.b)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Coefficient given by a positive radial function (power-law interpolation)."""

    table: RadialFunction

    def __post_init__(self):
        if np.any(self.table.values <= 0):
            raise DomainError("tabulated coefficient must be positive")
        if not self.table.head_exp > -2:
            raise DomainError("tabulated coefficient needs head exponent > -2")

    @property
    def a(self):
        return self.table.head_exp

    @property
    def b(self):
        return self.table.tail_exp

    def __call__(self, r):
        out = self.table(r)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class KelvinDualCoefficient:
    """beta(r) = r^{(N-2)(p-1)-4} alpha(1/r), the coefficient of the dual problem."""

    base: object
    N: int
    p: float

    @property
    def shift(self):
        return (self.N - 2) * (self.p - 1) - 4

    @property
    def a(self):
        return self.shift - self.base.b

    @property
    def b(self):
        return self.shift - self.base.a

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = r ** self.shift * np.asarray(self.base(1.0 / r))
        return float(out) if out.ndim == 0 else out


Coefficient = Union[PowerEnvelope, Tabulated, KelvinDualCoefficient]


def eval_coefficient(alpha, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("coefficient evaluation needs r > 0")
    return alpha(r)


# ---------------------------------------------------------------------------
# measures mu
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformBall:
    radius: float
    mass: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        if not self.mass > 0:
            raise DomainError("measure must be nontrivial (mass > 0)")

    def total_mass(self, N):
        return self.mass

    def lower_bound_ball(self, N):
        return self.radius, self.mass


@dataclass(frozen=True)
class SphereShell:
    radius: float
    mass: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("shell radius must be positive")
        if not self.mass > 0:
            raise DomainError("measure must be nontrivial (mass > 0)")

    def total_mass(self, N):
        return self.mass

    def lower_bound_ball(self, N):
        return self.radius, self.mass


@dataclass(frozen=True, eq=False)
class RadialDensity:
    density: RadialFunction

    def __post_init__(self):
        if np.any(self.density.values < 0) or not np.any(self.density.values > 0):
            raise DomainError("density must be nonnegative and nontrivial")

    def total_mass(self, N):
        f = self.density
        be = _kernels.backend
        inner = be.segment_moments(f.grid.nodes, f.values, N - 1.0).sum()
        head = f.values[0] * f.grid.r_min**N / (N + f.head_exp) if f.values[0] > 0 else 0.0
        tail = -f.values[-1] * f.grid.r_max**N / (N + f.tail_exp) if f.values[-1] > 0 else 0.0
        return N * unit_ball_volume(N) * (head + inner + tail)

    def lower_bound_ball(self, N):
        f = self.density
        rho = 1.0
        m = annulus_mass(f, N, 0.0, rho)
        if m <= 0:
            rho = f.grid.r_max
            m = annulus_mass(f, N, 0.0, rho)
        return rho, m


@dataclass(frozen=True, eq=False)
class SourcePotential:
    """Source supplied directly as its Newtonian potential (used by the dual problem)."""

    potential: RadialFunction
    mass: float = float("nan")

    def __post_init__(self):
        if not np.any(self.potential.values > 0):
            raise DomainError("source potential must be nontrivial")

    def total_mass(self, N):
        return self.mass

    def lower_bound_ball(self, N):
        raise DomainError("no explicit measure behind a source potential")


Measure = Union[UniformBall, SphereShell, RadialDensity, SourcePotential]


def annulus_mass(f, N, lo, hi):
    """Mass of the radial density f in {lo < |x| < hi}."""
    lo = max(lo, 1e-300)
    I = _kernels.backend.annulus_moments(f.grid.nodes, f.values, f.head_exp, f.tail_exp, [lo], [hi], N - 1.0)[0]
    return N * unit_ball_volume(N) * I


# ---------------------------------------------------------------------------
# problem data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Instance of -Delta u = alpha u^p + kappa mu in R^N, minus kappa."""

    N: int
    p: float
    alpha: Coefficient = field(default_factory=PowerEnvelope)
    mu: Measure = field(default_factory=lambda: UniformBall(1.0, 1.0))

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"dimension must be an integer >= 3, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not self.p > 1:
            raise DomainError(f"exponent must satisfy p > 1, got p={self.p}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def a(self):
        return float(self.alpha.a)

    @property
    def b(self):
        return float(self.alpha.b)

    def with_mu(self, mu):
        return ProblemSpec(self.N, self.p, self.alpha, mu)


@dataclass(frozen=True)
class SourceNormParams:
    """(r, c, d) with Gamma*mu in L^r_{c,d}."""

    r: float
    c: float
    d: float


def natural_norms(spec):
    """Norm parameters that every bounded, compactly supported source satisfies.

    Gamma*mu is then bounded and decays like r^{-(N-2)}, i.e. it lies in
    L^infty_{0,-N+2}.
    """
    return SourceNormParams(r=math.inf, c=0.0, d=-(spec.N - 2.0))


def reference_spec():
    """N=3, p=5, alpha = 1, mu = uniform unit ball of unit mass."""
    return ProblemSpec(N=3, p=5.0, alpha=PowerEnvelope(1.0, 0.0, 1.0, 0.0), mu=UniformBall(1.0, 1.0))
