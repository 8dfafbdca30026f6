"""Error taxonomy for the sidecar."""


class QuotevecError(Exception):
    """Base class for all errors raised by this package."""


class InputError(QuotevecError):
    """A dump, manifest, or argument is malformed or unreadable."""


class ModelError(QuotevecError):
    """A checkpoint cannot be resolved, loaded, or produces bad output."""
