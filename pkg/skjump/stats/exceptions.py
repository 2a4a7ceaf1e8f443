from skjump.exceptions import SkjumpError


class EstimatorError(SkjumpError):
    """Estimator called with unusable samples."""


class DegenerateNormError(EstimatorError):
    """A Malliavin norm sample is not positive.

    The model has no noise reaching the state (sigma and the jump
    coefficient vanish), so inverse moments do not exist.
    """
