"""Exception hierarchy.

``DataError`` subclasses describe bad input files or values and map to CLI
exit code 3; ``UsageError`` subclasses map to exit code 2.
"""


class ApronidError(Exception):
    pass


class UsageError(ApronidError):
    pass


class DataError(ApronidError):
    pass


# geometry
class EmptyPointSet(DataError, ValueError):
    pass


class EmptyMask(DataError, ValueError):
    pass


# photogrammetry
class InvalidCamera(UsageError, ValueError):
    pass


# identification
class ParseError(DataError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCode(DataError, ValueError):
    pass


class NonPositiveLength(DataError, ValueError):
    pass


# evaluation
class DimensionMismatch(DataError, ValueError):
    pass


class EmptySample(DataError, ValueError):
    pass


class NonPositiveActual(DataError, ValueError):
    pass


class UnknownCode(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


# dataio
class UnsupportedPngFlavor(DataError):
    pass


class DecodeError(DataError):
    pass


class RunSumMismatch(DataError, ValueError):
    pass


class SchemaError(DataError, ValueError):
    def __init__(self, message, path="$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class MissingMaskFile(DataError, FileNotFoundError):
    pass


class GsdMissing(DataError, ValueError):
    pass


# synthkit
class DegenerateSpec(DataError, ValueError):
    pass
