"""Exception hierarchy shared by all modules."""


class OmitChainError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(OmitChainError, ValueError):
    """One or more hard invariants of a configuration are violated.

    ``errors`` holds every ``(field, reason)`` pair found; ``field`` and
    ``reason`` mirror the first one for convenience.
    """

    def __init__(self, errors):
        errors = [tuple(e) for e in errors]
        if not errors:
            raise ValueError("ConfigError needs at least one (field, reason) pair")
        self.errors = errors
        self.field, self.reason = errors[0]
        msg = "; ".join(f"{f}: {r}" for f, r in errors)
        super().__init__(msg)


class UnknownPreset(OmitChainError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown preset {name!r}")

    def __str__(self):
        return self.args[0]


class NumericalError(OmitChainError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class SingularSystem(NumericalError):
    def __init__(self, message="linear system is singular", x=None):
        self.x = x
        if x is not None:
            message = f"{message} (at x={x!r})"
        super().__init__(message)


class NonConvergence(NumericalError):
    """Steady-state iteration did not settle; the system may be multistable."""

    def __init__(self, iterations, last_residual):
        self.iterations = iterations
        self.last_residual = last_residual
        super().__init__(
            f"steady state did not converge after {iterations} iterations "
            f"(last change {last_residual:.3e}); possible multistability"
        )


class DegenerateDenominator(NumericalError):
    def __init__(self, message="vanishing denominator", x=None):
        self.x = x
        if x is not None:
            message = f"{message} (at x={x!r})"
        super().__init__(message)


class PreconditionViolated(OmitChainError, ValueError):
    pass


class FitNonConvergence(NumericalError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Fano fit did not converge in {iterations} iterations (rms {residual:.3e})"
        )


class DegenerateSlice(OmitChainError, ValueError):
    pass
