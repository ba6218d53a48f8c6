"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PotentialDivergenceError(ArithmeticError):
    """The Newtonian potential integral diverges at the head or the tail."""

    def __init__(self, end, detail=""):
        self.end = end
        msg = f"potential diverges at the {end}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotContractiveError(ArithmeticError):
    """The correction map failed to contract at the requested kappa."""

    def __init__(self, kappa, factor, iterations):
        self.kappa = kappa
        self.factor = factor
        self.iterations = iterations
        super().__init__(
            f"not contractive at this kappa={kappa:g} "
            f"(observed factor {factor:.4g} after {iterations} iterations)"
        )


class DegenerateLinearizationError(ArithmeticError):
    """The linearized operator is numerically zero; lambda is effectively infinite."""

    def __init__(self, last_estimate):
        self.last_estimate = last_estimate
        super().__init__(
            "degenerate linearization, lambda effectively infinite "
            f"(last finite estimate {last_estimate!r})"
        )


class EigenConvergenceError(ArithmeticError):
    """Power iteration did not settle within the iteration budget."""

    def __init__(self, estimate, iterations):
        self.estimate = estimate
        self.iterations = iterations
        super().__init__(
            f"power iteration did not converge after {iterations} steps "
            f"(last lambda estimate {estimate:.6g})"
        )


class BracketError(RuntimeError):
    """No convergent/divergent bracket was found within the evaluation budget."""
