"""Custom exceptions and warnings for the mhdlayer library."""

from typing import Optional


class LabError(Exception):
    """Base class for all mhdlayer errors."""
    pass


class ConfigError(LabError):
    """Raised when a run configuration is malformed or violates an invariant."""
    pass


class GridError(ConfigError):
    """Raised when grid parameters do not describe a valid discretization."""
    pass


class NonFiniteWeightProduct(LabError):
    """Raised when a Gaussian-weighted product overflows (y_max/decay mismatch)."""
    pass


class SingularTridiagonal(LabError):
    """Raised when an implicit diffusion system cannot be factorized."""
    pass


class InsufficientSamples(LabError):
    """Raised when a shear trace is too short or too narrow to fit decay rates."""
    pass


class NonFiniteTendency(LabError):
    """Raised when a right-hand side evaluation produces NaN or infinity."""
    pass


class BlowupDetected(LabError):
    """Raised when a trajectory leaves the trusted range during time stepping."""

    def __init__(self, t: float, reason: str = "norm-cap", message: Optional[str] = None):
        self.t = t
        self.reason = reason
        super().__init__(message or f"blow-up detected at t={t:.6g} ({reason})")


class OverflowAtM(LabError):
    """Raised when a semi-norm term overflows even in log space."""

    def __init__(self, m: int):
        self.m = m
        super().__init__(f"semi-norm term overflows at m={m}")


class ZeroDenominator(LabError):
    """Raised in strict mode when a Poincare ratio has a vanishing denominator."""
    pass


class UnstableSample(LabError):
    """Raised when monitor norms are non-finite at a trajectory sample."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite norms at t={t:.6g}")


class RadiusCollapsed(LabError):
    """Raised when the analyticity radius reaches zero."""
    pass


class DomainError(LabError):
    """Raised when a formula is evaluated outside its domain."""
    pass


class DegenerateFit(LabError):
    """Raised when fewer than two finite lifespans are available for a fit."""
    pass


class CheckpointError(LabError):
    """Raised when a checkpoint cannot be read or does not match the run."""
    pass


class CFLViolation(UserWarning):
    """Warned when the explicit part of a step exceeds its stability estimate."""
    pass


class TruncationWarning(UserWarning):
    """Warned when the discarded tail of a semi-norm series is not negligible."""
    pass


class FieldError(LabError):
    """Raised when field samples do not match their grid or are not finite."""
    pass
