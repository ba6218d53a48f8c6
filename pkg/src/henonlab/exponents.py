"""Critical exponents, admissibility checks and Kelvin-dual parameter algebra.

Infinite exponents are plain ``math.inf``; every comparison ``p < inf`` is
then true without special cases. Boundary values count as out of range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

INF = math.inf


def _check_dim(N):
    if int(N) != N or N < 3:
        raise DomainError(f"dimension must be an integer >= 3, got N={N}")


def p_joseph_lundgren(N):
    _check_dim(N)
    if N > 10:
        return 1.0 + 4.0 / (N - 4.0 - math.sqrt(4.0 * N - 4.0))
    return INF


def p_star_upper(N, eta):
    """Upper exponent p^*(eta); infinite unless N > 10 + 4 eta."""
    _check_dim(N)
    if N > 10.0 + 4.0 * eta:
        D = (eta + 2.0) * (2.0 * N + eta - 2.0)
        return 1.0 + 2.0 * (eta + 2.0) / (N - eta - 4.0 - math.sqrt(D))
    return INF


def p_star_lower(N, eta):
    """Lower exponent p_*(eta); exactly 1 when eta <= -2."""
    _check_dim(N)
    if eta > -2.0:
        D = (eta + 2.0) * (2.0 * N + eta - 2.0)
        return 1.0 + 2.0 * (eta + 2.0) / (N - eta - 4.0 + math.sqrt(D))
    return 1.0


@dataclass(frozen=True)
class Check:
    name: str
    text: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class Derived:
    q: float
    c_bar: float
    d_bar: float
    c_star: float
    d_star: float


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    checks: list = field(default_factory=list)
    derived: Derived = None

    def failed(self):
        return [c for c in self.checks if not c.holds]

    def as_dict(self):
        return {
            "admissible": self.admissible,
            "checks": [
                {"name": c.name, "inequality": c.text, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds}
                for c in self.checks
            ],
            "derived": None if self.derived is None else vars(self.derived),
        }


def check_admissible(spec, norms):
    N, p, a, b = spec.N, spec.p, spec.a, spec.b
    r, c, d = norms.r, norms.c, norms.d
    if not a > -2:
        raise DomainError(f"coefficient exponent near the origin must satisfy a > -2, got a={a}")

    def gt(name, text, lhs, rhs):
        return Check(name, text, lhs, rhs, lhs > rhs)

    def lt(name, text, lhs, rhs):
        return Check(name, text, lhs, rhs, lhs < rhs)

    checks = [
        gt("p>1", "p > 1", p, 1.0),
        gt("r>p", "r > p", r, p),
        gt("p_serrin", "p > (N+b)/(N-2)", p, (N + b) / (N - 2)),
        gt("r_lower", "r > N(p-1)/2", r, N * (p - 1) / 2),
        gt("c_lower", "c > -(a+2)/(p-1)", c, -(a + 2) / (p - 1)),
        lt("d_upper", "d < -(b+2)/(p-1)", d, -(b + 2) / (p - 1)),
    ]
    admissible = all(ch.holds for ch in checks)
    c_star = min(c, 0.0)
    d_star = max(d, -N + 2.0)
    derived = Derived(
        q=r / (p - 1),
        c_bar=(p - 1) * c_star + a,
        d_bar=(p - 1) * d_star + b,
        c_star=c_star,
        d_star=d_star,
    )
    if admissible:
        # consequences of the four inequalities; a failure here is a bug
        assert derived.q > N / 2, derived
        assert derived.c_bar > -2, derived
        assert derived.d_bar < -2, derived
    return AdmissibilityReport(admissible, checks, derived)


def check_uniqueness_range(spec):
    """True iff p_*(b) < p < p^*(min(a, 0))."""
    N, p = spec.N, spec.p
    return p_star_lower(N, spec.b) < p < p_star_upper(N, min(spec.a, 0.0))


@dataclass(frozen=True)
class DualParams:
    a_sharp: float
    b_sharp: float
    c_sharp: float
    d_sharp: float


def dual_exponents(N, p, a, b, c, d):
    shift = (N - 2) * (p - 1) - 4
    return DualParams(shift - b, shift - a, -N + 2 - d, -N + 2 - c)


def kelvin_dual_params(spec, norms):
    return dual_exponents(spec.N, spec.p, spec.a, spec.b, norms.c, norms.d)


def dual_closing_inequalities(N, p, dual):
    """The three inequalities the dual parameters satisfy for admissible data."""
    return {
        "a_sharp>-2": dual.a_sharp > -2,
        "p>(N+b_sharp)/(N-2)": p > (N + dual.b_sharp) / (N - 2),
        "c_sharp>-(a_sharp+2)/(p-1)": dual.c_sharp > -(dual.a_sharp + 2) / (p - 1),
        "d_sharp<-(b_sharp+2)/(p-1)": dual.d_sharp < -(dual.b_sharp + 2) / (p - 1),
    }


def nu_window(N, eta, p):
    """Open interval of nu > 1 with nu^2/(2nu-1) < p < 1 + 2(2+eta)nu/(N-2), or None.

    nu^2/(2nu-1) < p is nu^2 - 2p nu + p < 0, whose smaller root is below 1
    for p > 1, so that constraint reads 1 < nu < p + sqrt(p^2 - p). The second
    is nu > (p-1)(N-2)/(2(2+eta)) when eta > -2 and impossible otherwise.
    """
    if not p > 1 or not eta > -2:
        return None
    upper = p + math.sqrt(p * p - p)
    lower = max(1.0, (p - 1.0) * (N - 2.0) / (2.0 * (2.0 + eta)))
    if lower < upper:
        return (lower, upper)
    return None


def dual_window(N, b, p):
    """nu-window for the dual problem, using (a_sharp)_- with a_sharp = (N-2)(p-1)-4-b.

    At a_sharp == 0 exactly both branches agree since min(a_sharp, 0) = 0.
    """
    a_sharp = (N - 2) * (p - 1) - 4 - b
    return nu_window(N, min(a_sharp, 0.0), p)


def exponent_summary(N, a=0.0, b=0.0):
    return {
        "N": N,
        "p_JL": p_joseph_lundgren(N),
        "p_JL_prime": p_star_lower(N, 0.0),
        "p_star_lower(b)": p_star_lower(N, b),
        "p_star_upper(a_-)": p_star_upper(N, min(a, 0.0)),
        "p_sobolev": (N + 2) / (N - 2),
        "p_serrin(b)": (N + b) / (N - 2),
    }
