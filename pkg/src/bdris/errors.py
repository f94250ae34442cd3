"""Exception types raised across the package."""


class BDRISError(Exception):
    """Base class for all package errors."""


class NotSymmetric(BDRISError, ValueError):
    pass


class DecompositionFailure(BDRISError, ArithmeticError):
    pass


class DimensionMismatch(BDRISError, ValueError):
    pass


class InvalidGrouping(BDRISError, ValueError):
    """Element count is not divisible by the group count."""


class InvalidStemCount(BDRISError, ValueError):
    """Stem count outside the range allowed by the architecture."""


class MaskViolation(BDRISError, ValueError):
    """Matrix has non-zeros where the architecture forbids them."""


class SingularMatrix(BDRISError, ArithmeticError):
    pass


class SingularAtMinusOne(BDRISError, ArithmeticError):
    """Scattering matrix has an eigenvalue at -1, so no finite susceptance exists."""


class ConfigError(BDRISError, ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
