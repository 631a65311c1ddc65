"""Exception hierarchy shared by all modules.

Two families: ValidationError for malformed inputs or configuration (CLI exit
code 1) and PhysicsError for runs that are well formed but land in a regime
the requested analysis cannot handle (CLI exit code 2).
"""


class ValidationError(ValueError):
    """Invalid parameter values, configuration keys, or preconditions."""


class RatioUndefinedError(ValidationError):
    """A rate ratio was requested with a vanishing denominator rate."""


class DegenerateSystemError(ValidationError):
    """The requested system is degenerate (e.g. quadratic solve with g1 = 0)."""


class DegenerateNoiseWarning(RuntimeWarning):
    """A noise channel has zero rate; the built system has singular input."""


class PhysicsError(RuntimeError):
    """Physically meaningful failure: instability, unresolved sidebands, ..."""


class UnphysicalShiftError(PhysicsError):
    """Interaction shifts pushed an oscillator frequency to zero or below."""


class NotSidebandResolvedError(PhysicsError):
    """Sideband peaks cannot be resolved in the spectrum."""


class SingularResolventError(PhysicsError):
    """iw*I - M is singular at the probed frequency."""

    def __init__(self, w: float, eigenvalue: complex):
        self.w = w
        self.eigenvalue = eigenvalue
        super().__init__(
            f"resolvent singular at w={w!r}: undamped eigenvalue {eigenvalue!r}"
        )


class UnstableSystemError(PhysicsError):
    """The linearized drift matrix has an eigenvalue with positive real part."""


class BlowUpError(PhysicsError):
    """Trajectory amplitude overflowed during stochastic integration."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"trajectory blow-up detected at step {step}")
