"""Exception types shared across pipeline stages."""


class PipelineError(Exception):
    """Base class for typed pipeline failures."""


class ConfigError(PipelineError):
    """Bad or missing run configuration."""


class DataError(PipelineError):
    """Input files are structurally unusable (missing, unparseable header, ...)."""


class InsufficientDataError(PipelineError):
    """A modeling step has too few rows to proceed."""


class DegenerateLabelsError(PipelineError):
    """A label vector contains a single class where two are required."""
