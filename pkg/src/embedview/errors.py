"""Exception hierarchy shared across the engine."""


class EmbedviewError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(EmbedviewError):
    """Malformed container (bad header, truncated file, unparseable row).

    Carries a best-effort position so callers can point at the offending
    input region.
    """

    def __init__(self, message, row=None, byte=None):
        pos = []
        if row is not None:
            pos.append(f"row {row}")
        if byte is not None:
            pos.append(f"byte {byte}")
        if pos:
            message = f"{message} ({', '.join(pos)})"
        super().__init__(message)
        self.row = row
        self.byte = byte


class SchemaError(EmbedviewError):
    """Inconsistent column structure, e.g. mixed vector dimensionality."""


class NotFound(EmbedviewError):
    """Unknown column or row."""


class IoError(EmbedviewError):
    """Unreadable source or unwritable sink."""


class QueryError(EmbedviewError):
    """Predicate/column dtype mismatch or invalid query arguments."""


class ParamError(EmbedviewError):
    """Out-of-range numeric parameter (sigma, radius, ...)."""
