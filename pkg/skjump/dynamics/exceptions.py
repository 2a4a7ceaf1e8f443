from skjump.exceptions import SkjumpError


class ModelError(SkjumpError):
    """Model construction or parameter error.

    Fields:
        errors: mapping of parameter name to list of messages, when the error
            comes from parameter validation.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}


class UnknownModelError(ModelError):
    """No built-in model with the requested name."""


class LogFloorViolation(ModelError):
    """1 + dc/dx fell to or below the logarithm floor.

    Raised by assumption probing (``index`` is the probe index) and by the
    closed-form Malliavin oracle (``index`` is the realized jump index).
    """

    def __init__(self, message, index, value):
        super().__init__(message)
        self.index = index
        self.value = value


class DerivativeMismatch(ModelError):
    """A derivative field disagrees with a finite difference of its parent."""

    def __init__(self, message, field, max_error):
        super().__init__(message)
        self.field = field
        self.max_error = max_error
