"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: config/ingest/validation problems
exit with 2, an evaluation that produced no queries exits with 1.
"""


class CharvoiceError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CharvoiceError):
    """Invalid configuration: schema files, run configs, encoder params."""


class IngestError(CharvoiceError):
    """A corpus file is missing, unreadable, or structurally broken."""


class ValidationError(CharvoiceError):
    """Well-formed input with invalid content (bad spans, unknown labels,
    unresolvable speakers, malformed embedding records)."""


class QuerySkipped(CharvoiceError):
    """A query cannot be scored; carries a machine-readable reason code."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code
