"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LabError):
    """Malformed experiment configuration. Message names the offending field."""


class GeometryError(LabError, ValueError):
    pass


class OverlapError(GeometryError):
    """Branch images of the root disc have intersecting closures."""


class EscapeError(GeometryError):
    """A branch image is not strictly inside the root disc."""


class ResourceLimitError(LabError):
    """A requested computation exceeds a hard size cap."""


class SamplingError(LabError):
    pass


class LaunchDomainError(SamplingError):
    """Launch circle intersects the root disc of the target set."""


class ExcessiveDiscardError(SamplingError):
    """More than the allowed fraction of walks hit the step limit."""


class SingularityError(LabError):
    """Evaluation point coincides with an atom of the measure."""


class InsufficientMassError(LabError):
    """A ball holds too few atoms for a stable mass estimate."""


class DispersionError(LabError):
    """Near-boundary potential values spread too widely for a Robin estimate."""


class VarianceError(LabError):
    """Monte Carlo relative error above the requested gate."""


class DepthError(LabError):
    """Atom codes are shorter than the requested cylinder generation."""


class FitDegeneracyError(LabError):
    """Regression input spans too narrow a range to fit."""


class BootstrapError(LabError):
    """Too few samples to bootstrap a confidence interval."""


class QuadratureError(LabError):
    """Adaptive quadrature failed to converge within the refinement cap."""


class OutputCollisionError(LabError):
    """Output directory already holds report files and force is off."""
