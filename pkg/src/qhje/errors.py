"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all qhje errors."""


class InvalidGrid(EngineError):
    """Grid does not satisfy the basic sanity requirements."""


class NonFiniteField(EngineError):
    """A solved field overflowed or produced NaN (deep forbidden region)."""


class DegenerateMicrostate(EngineError):
    """Microstate constants violate a != 0 (equivalently mu*nu != 1)."""


class EnergyMismatch(EngineError):
    """Basis pair and microstate were built at different energies."""


class ForbiddenRegion(EngineError):
    """Operation requires a classically allowed path but E <= V on it."""


class TurningPoint(EngineError):
    """Evaluation point is inside the |E - V| guard band."""


class TurningPointInPath(EngineError):
    """Integration arc crosses a classical turning point."""


class QuadratureFailure(EngineError):
    """Adaptive quadrature could not reach the requested tolerance."""


class StepFailure(EngineError):
    """Adaptive ODE stepping failed (tolerance unreachable)."""


class ZeroVelocity(EngineError):
    """Kinematic state has zero velocity where the law of motion needs 1/v."""


class NoRealRoot(EngineError):
    """Energy quartic has no admissible real root."""


class SingularDenominator(EngineError):
    """Closed-form time law denominator vanished."""


class BranchMismatch(EngineError):
    """Branch unwrapping differs between two action evaluations."""


class ParseError(EngineError):
    """Config file is syntactically invalid or contains unknown keys."""


class ValidationError(EngineError):
    """Config file parsed but the values are inconsistent."""
