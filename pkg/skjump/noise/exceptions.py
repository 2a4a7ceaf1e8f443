from skjump.exceptions import SkjumpError


class NoiseError(SkjumpError):
    """Invalid noise sampling request or malformed noise data."""


class GridError(NoiseError):
    """Invalid time grid or coarsening factor."""
