"""Exception types shared across the package."""


class CtrnetError(Exception):
    """Base class for package-specific errors."""


class DataFormatError(CtrnetError, ValueError):
    """Malformed input data: bad labels, missing columns, bad fractions."""


class SchemaMismatchError(CtrnetError, ValueError):
    """A model file's schema does not fit the data it was applied to."""


class TrainingDiverged(CtrnetError, RuntimeError):
    """A training run produced a non-finite loss or parameters."""
