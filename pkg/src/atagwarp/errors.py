"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2, ``NumericError``
subclasses to exit code 3.
"""


class AtagWarpError(Exception):
    """Base class for every error raised by this package."""


class InputError(AtagWarpError, ValueError):
    pass


class NumericError(AtagWarpError, ArithmeticError):
    pass


class DegenerateGeometryError(NumericError):
    """Zero-length vector or bone where a direction is required."""


class FitError(NumericError):
    """TPS system could not be solved (too few / collinear points, singular)."""


class DimensionError(InputError):
    """Rasters that must share a frame have different shapes."""


class AbsentLandmarkError(InputError):
    def __init__(self, joint, confidence=None, threshold=None):
        self.joint = joint
        self.confidence = confidence
        self.threshold = threshold
        msg = f"landmark {joint!r} is absent"
        if confidence is not None:
            msg += f" (confidence {confidence:.3f} < threshold {threshold:.3f})"
        super().__init__(msg)


class EmptyPartError(InputError):
    """A garment part that the pipeline requires has no pixels."""
