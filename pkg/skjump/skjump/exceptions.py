"""Exceptions shared by every skjump app.

Errors that end a command carry the process exit code the CLI returns:

    0  success
    2  config error
    3  noise-floor abort
    4  numerical abort (non-finite paths)

"""


class SkjumpError(Exception):
    """Base class for all skjump errors."""

    exit_code = 1


class ConfigError(SkjumpError):
    """Invalid experiment configuration.

    Fields:
        errors: mapping of dotted config key to list of messages.
    """

    exit_code = 2

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}

    def __str__(self):
        if not self.errors:
            return self.args[0]
        lines = [self.args[0]]
        for key, messages in sorted(self.errors.items()):
            for message in messages:
                lines.append('  {}: {}'.format(key, message))
        return '\n'.join(lines)


class NoiseFloorError(SkjumpError):
    """KS signal would be buried in the two-sample noise floor."""

    exit_code = 3

    def __init__(self, message, required_n):
        super().__init__(message)
        self.required_n = required_n


class NumericalAbort(SkjumpError):
    """At least one simulated path went non-finite.

    Fields:
        aborts: number of aborted paths
        bundle: the ResultBundle written before the abort, if any
    """

    exit_code = 4

    def __init__(self, message, aborts, bundle=None):
        super().__init__(message)
        self.aborts = aborts
        self.bundle = bundle
