"""Exception types shared across the toolkit."""


class PhotocraftError(Exception):
    """Base class for all toolkit errors."""


class AllBlackImage(PhotocraftError):
    """White-point estimation needs at least some luminance."""


class OutOfLocus(PhotocraftError):
    """Chromaticity or temperature outside the usable CCT estimation range."""


class ParamOutOfRange(PhotocraftError):
    """Retouching parameter outside its validated bounds."""


class IoError(PhotocraftError):
    """Image or manifest file could not be read or written."""


class UnparseableSuggestion(PhotocraftError):
    """Suggestion text outside the closed grammar."""

    def __init__(self, message: str, span: str = ""):
        super().__init__(message)
        self.span = span


class DuplicateAttribute(PhotocraftError):
    """Two suggestions target the same retouch attribute."""


class UnmeasurableAttribute(PhotocraftError):
    """Compliance asked for an attribute with no measurement (dof, restore)."""


class MetricFailure(PhotocraftError):
    """External perceptual-metric command misbehaved."""


class ScoreOutOfRange(PhotocraftError):
    """Critic score outside [0, 100]."""


class NoApplicableSuggestion(PhotocraftError):
    """Exploration reward has nothing to apply and nothing to check."""


class LengthMismatch(PhotocraftError):
    """Paired token sequences differ in length."""


class DimensionMismatch(PhotocraftError):
    """Paired vectors differ in dimension."""


class ProbabilityOutOfRange(PhotocraftError):
    """Optimality probability outside [0, 1]."""


class UnknownRestorationLabel(PhotocraftError):
    """Dataset degradation tag not in the restoration vocabulary."""


class SchemaViolation(PhotocraftError):
    """Manifest record does not match the expected schema."""
