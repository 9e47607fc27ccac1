"""Exception hierarchy for the monoscale package.

Every library error derives from :class:`MonoscaleError` so callers can catch
the whole family with one clause; the CLI maps subfamilies to exit codes.
"""


class MonoscaleError(Exception):
    """Base class for all monoscale errors."""


# --- geometry -----------------------------------------------------------


class NonPositiveDepthError(MonoscaleError):
    """A 3D point with depth <= 0 cannot be projected."""


class HorizonRowError(MonoscaleError):
    """Pixel row too close to the principal row; ground depth is singular there."""


class InvalidRotationError(MonoscaleError):
    """Matrix is not a proper rotation (orthonormal, det = +1)."""


# --- two-view estimation --------------------------------------------------


class InsufficientMatchesError(MonoscaleError):
    """Fewer correspondences than the minimal sample requires."""


class DegenerateConfigurationError(MonoscaleError):
    """Correspondence geometry carries no usable signal (e.g. zero parallax)."""


class AmbiguousCheiralityError(MonoscaleError):
    """Essential-matrix candidates tie on the positive-depth vote."""


class SingularNormalEquationsError(MonoscaleError):
    """Rank-deficient normal equations in the pose refinement."""


# --- point selection and fitting -------------------------------------------


class TooFewPointsError(MonoscaleError):
    """Not enough points for the requested operation."""


class CollinearPointsError(MonoscaleError):
    """All points lie on one line; the model is not determined."""


class DegenerateTriangleError(MonoscaleError):
    """Triangle vertices are collinear in 3D; no plane normal exists."""


class NoConsensusError(MonoscaleError):
    """RANSAC found no hypothesis with enough inliers."""


class NonPositiveHeightError(MonoscaleError):
    """Fitted plane passes through (or behind) the camera center."""


class EmptyQueueError(MonoscaleError):
    """The scale queue holds no values to filter."""


class LengthMismatchError(MonoscaleError):
    """Paired sequences have different lengths."""


class DegenerateGeometryError(MonoscaleError):
    """Point configuration does not determine the alignment."""


class PathTooShortError(MonoscaleError):
    """Reference path is shorter than every evaluation subsequence."""


class EmptySceneError(MonoscaleError):
    """Scene specification contains no points of any class."""


# --- files and configuration -------------------------------------------------


class ParseError(MonoscaleError):
    """Malformed input file.

    Carries the path and 1-based line number when they are known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class UnsupportedFormatError(MonoscaleError):
    """File is not in the expected binary format."""


class DimensionMismatchError(MonoscaleError):
    """File dimensions disagree with the configured image size."""


class ConfigError(MonoscaleError):
    """Invalid or unknown configuration key/value."""
