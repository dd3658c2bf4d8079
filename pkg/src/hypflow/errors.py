"""Exception types shared across the package."""


class HypflowError(Exception):
    """Base class for all package-specific errors."""


class ZeroVector(HypflowError):
    """Operation requires a nonzero vector."""


class NotOrthonormal(HypflowError):
    """Basis fails the eta-orthonormality / orientation requirements."""


class DegenerateFrame(HypflowError):
    """Frame cannot be re-orthonormalized (near-singular input)."""


class ConstraintViolation(HypflowError):
    """Conserved quantity drifted beyond tolerance, or inconsistent input."""


class StepSizeUnderflow(HypflowError):
    """Adaptive integrator failed to advance."""


class FrameDrift(HypflowError):
    """Frame invariants exceeded tolerance after correction."""


class Inconsistent(HypflowError):
    """No frame realizes the requested inner products."""


class OutsideDisk(HypflowError):
    """Requested parameter leaves the Poincare disk."""


class OnOrOutsideBoundary(HypflowError):
    """Disk point is not strictly inside the unit circle."""


class MultipleCriticalPoints(HypflowError):
    """More than one critical point of mu detected (integration fault)."""


class MultipleZeros(HypflowError):
    """More than one zero of mu detected (integration fault)."""


class WindowTooShort(HypflowError):
    """Trajectory window too short for end-behavior analysis."""


class InconsistentWithTheorem(HypflowError):
    """A classification check failed; the run is flagged for inspection."""


class TooFewPoints(HypflowError):
    """Discrete operation needs more samples."""


class StabilityViolation(HypflowError):
    """Explicit time step exceeds the stability bound."""


class BlowupWindow(HypflowError):
    """Curvature law leaves its domain of validity inside the time grid."""


class EmptyTrajectory(HypflowError):
    """Figure rendering received no samples."""
