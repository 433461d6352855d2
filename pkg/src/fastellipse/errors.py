"""Exception types raised across the detector."""


class EllipseDetectError(Exception):
    """Base class for all detector errors."""


# projective geometry
class IdenticalLines(EllipseDetectError):
    pass


class NotOnSide(EllipseDetectError):
    pass


class DegenerateDecomposition(EllipseDetectError):
    pass


class ParallelChords(EllipseDetectError):
    pass


# image handling
class UnsupportedFormat(EllipseDetectError):
    pass


class OutOfFrame(EllipseDetectError):
    pass


# fitting
class FitError(EllipseDetectError):
    """Any failure while turning an arc triple into ellipse parameters."""


class InsufficientSpan(FitError):
    pass


class DegenerateCenter(FitError):
    pass


class NotAnEllipse(FitError):
    pass


class IllConditioned(FitError):
    pass


class DatasetFormatError(EllipseDetectError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ConfigError(EllipseDetectError):
    pass
