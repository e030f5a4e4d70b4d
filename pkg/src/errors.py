"""Exception hierarchy for the superlocality toolkit."""


class ToolkitError(ValueError):
    """Base class for domain errors raised by the toolkit."""


class ScalarParseError(ToolkitError):
    """A string could not be parsed as an exact scalar."""


class InvalidBox(ToolkitError):
    """A table does not describe a box of the expected shape."""


class NegativeProbability(ToolkitError):
    """Correlators produced a negative entry (outside the nonsignaling polytope)."""


class SignalingMarginal(ToolkitError):
    """A marginal depends on the inputs of the parties summed over."""


class WeightError(ToolkitError):
    """Mixture weights are negative, mismatched or do not sum to one."""


class ParameterOutOfRange(ToolkitError):
    """A family or decomposition parameter lies outside its valid range."""


class NotInR(ToolkitError):
    """The box lies outside the Svetlichny-box polytope."""

    def __init__(self, message: str = "not in Svetlichny-box polytope"):
        super().__init__(message)


class SnapFailure(ToolkitError):
    """A float entry is farther than the tolerance from the exact lattice."""


class InvalidSnapped(ToolkitError):
    """The snapped box is not normalized or not nonsignaling."""


class InvalidState(ToolkitError):
    """A quantum state is not normalized, Hermitian or positive."""


class InvalidSettings(ToolkitError):
    """Measurement settings are not unit Bloch vectors."""


class SoundnessViolation(AssertionError):
    """A verified witness contradicts a rank certificate."""
