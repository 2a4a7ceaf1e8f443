from skjump.exceptions import SkjumpError


class IntegrationError(SkjumpError):
    """Base class for integrator errors."""


class StabilityError(IntegrationError):
    """The direct SK scheme was asked to run with fine dt > eps / ratio."""


class NonFiniteStateError(IntegrationError):
    """A path went NaN or infinite.

    Fields:
        path_index: stream id of the offending path
        step: first step whose end state is not finite
    """

    def __init__(self, message, path_index, step):
        super().__init__(message)
        self.path_index = path_index
        self.step = step


class PathMismatchError(IntegrationError):
    """Trajectory, noise path and model do not belong together."""


class FieldIndexError(IntegrationError):
    """Perturbation index outside the grid."""
