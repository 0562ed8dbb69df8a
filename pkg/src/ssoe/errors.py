"""Exception types shared across the package."""


class SsoeError(Exception):
    """Base class for library errors."""


class SpecificationError(SsoeError, ValueError):
    """Model specification is inadmissible or inconsistent with the data."""


class StructuralError(SsoeError, IndexError):
    """State history does not cover a requested position."""


class EstimationError(SsoeError, RuntimeError):
    """The optimiser could not find a finite objective value."""


class InputError(SsoeError, ValueError):
    """Input file or value could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GenerationError(SsoeError, RuntimeError):
    """A randomizer produced non-finite innovations."""


class FormatError(InputError):
    """A saved model file is malformed; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"field {field!r}: {message}"
        super().__init__(message)
        self.field = field
