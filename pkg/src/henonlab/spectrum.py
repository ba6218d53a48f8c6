"""First eigenvalue of -Delta phi = p lambda alpha u^{p-1} phi by power iteration
on T phi = Gamma*(p alpha u^{p-1} phi); lambda = 1/rho(T)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateLinearizationError, DomainError, EigenConvergenceError
from .potential import newtonian_potential
from .radial import RadialFunction, decay_weight, unit_ball_volume


@dataclass(frozen=True)
class EigenOptions:
    tol: float = 1e-9
    max_iter: int = 5000
    # consecutive small ratio changes needed to stop
    streak: int = 3


@dataclass(frozen=True, eq=False)
class EigenReport:
    lam: float
    phi: RadialFunction
    iterations: int
    residual: float
    # Collatz-Wielandt bracket for rho(T): min and max of (T phi)/phi over nodes
    rho_lower: float
    rho_upper: float
    shape_lower: float
    shape_upper: float

    def summary(self):
        return {
            "lambda": self.lam,
            "iterations": self.iterations,
            "residual": self.residual,
            "rho_lower": self.rho_lower,
            "rho_upper": self.rho_upper,
            "shape_lower": self.shape_lower,
            "shape_upper": self.shape_upper,
        }


def linearized_potential(spec, u):
    """The weight p alpha u^{p-1} as a radial function with composed exponents."""
    if np.any(u.values < 0):
        raise DomainError("linearization needs u >= 0")
    p = spec.p
    vals = p * np.asarray(spec.alpha(u.grid.nodes)) * u.values ** (p - 1.0)
    return RadialFunction(u.grid, vals, spec.a + (p - 1) * u.head_exp, spec.b + (p - 1) * u.tail_exp)


def apply_operator(W, phi, N):
    dens = RadialFunction(phi.grid, W.values * phi.values, W.head_exp + phi.head_exp, W.tail_exp + phi.tail_exp)
    return newtonian_potential(dens, N)


def linearized_eigenvalue(spec, u, opts=None):
    opts = opts or EigenOptions()
    N = spec.N
    W = linearized_potential(spec, u)
    if not np.any(u.values > 0):
        raise DegenerateLinearizationError(math.inf)
    wt = decay_weight(u.grid.nodes, N)
    phi = RadialFunction(u.grid, 1.0 / wt, 0.0, -(N - 2.0))
    rho_prev = None
    est = math.nan
    streak = 0
    for it in range(1, opts.max_iter + 1):
        T = apply_operator(W, phi, N)
        norm = float(np.max(T.values * wt))
        if not norm > 1e-300 or not math.isfinite(norm):
            raise DegenerateLinearizationError(1.0 / rho_prev if rho_prev else math.inf)
        # phi is normalized to weighted sup 1, so the norm is the ratio
        rho = norm
        est = 1.0 / rho
        nxt = T.with_values(T.values / norm)
        if rho_prev is not None and abs(rho - rho_prev) <= opts.tol * rho:
            streak += 1
        else:
            streak = 0
        phi = nxt
        rho_prev = rho
        if streak >= opts.streak:
            TT = apply_operator(W, phi, N)
            lam = 1.0 / float(np.max(TT.values * wt))
            res = float(np.max(np.abs(phi.values - lam * TT.values) * wt))
            ratio = TT.values / phi.values
            shape = phi.values * wt
            return EigenReport(lam, phi, it, res, float(ratio.min()), float(ratio.max()),
                               float(shape.min()), float(shape.max()))
    raise EigenConvergenceError(est, opts.max_iter)


def stability_quotient(spec, u, phi):
    """(p int alpha u^{p-1} phi^2, int |grad phi|^2) for radial phi.

    On each segment phi is a power with log-slope sigma, so
    |grad phi|^2 = sigma^2 phi^2 / r^2 integrates exactly; the head and tail
    extensions contribute in closed form.
    """
    N = spec.N
    r = u.grid.nodes
    f = phi.values
    area = N * unit_ball_volume(N)
    be = _kernels.backend
    # gradient term segment by segment
    L = np.log(r[1:] / r[:-1])
    sig = np.log(f[1:] / f[:-1]) / L
    seg = be.segment_moments(r, f * f, N - 3.0)
    grad = float(np.sum(sig * sig * seg))
    s0, s1 = phi.head_exp, phi.tail_exp
    if s0 != 0.0:
        grad += s0 * s0 * f[0] ** 2 * r[0] ** (N - 2) / (N - 2 + 2 * s0)
    if s1 != 0.0:
        grad += -s1 * s1 * f[-1] ** 2 * r[-1] ** (N - 2) / (N - 2 + 2 * s1)
    grad *= area
    W = linearized_potential(spec, u)
    g = W.values * f * f
    pot = float(be.segment_moments(r, g, N - 1.0).sum())
    h0 = W.head_exp + 2 * s0
    h1 = W.tail_exp + 2 * s1
    pot += g[0] * r[0] ** N / (N + h0)
    pot += -g[-1] * r[-1] ** N / (N + h1)
    pot *= area
    return pot, grad
