class HolderMetricsError(Exception):
    """Base class for every error raised by the toolkit"""


class BadParameter(HolderMetricsError, ValueError):
    """A constructor or operation received a parameter outside its range"""


class BadAlpha(BadParameter):
    """Hölder exponent outside (0, 1]"""


class BadFlag(BadParameter):
    """A command-line flag or config key could not be parsed"""


class UnknownDomain(HolderMetricsError, KeyError):
    """Catalog name could not be resolved"""

    def __str__(self):
        return str(self.args[0]) if self.args else 'unknown domain'


class OutOfDomain(HolderMetricsError, ValueError):
    """A point lies outside the open unit disk where the map is defined"""


class NonFiniteIntegrand(HolderMetricsError):
    """Quadrature hit a node where the integrand is not finite"""


class EmptyBoundary(HolderMetricsError, ValueError):
    """A boundary sample set is empty"""


class NoInverse(HolderMetricsError):
    """The conformal map has no registered inverse"""


class PreimageNotInDisk(HolderMetricsError):
    """The inverse map sent a point outside the unit disk"""


class ZeroDerivative(HolderMetricsError):
    """The map's derivative vanished where a density was requested"""


class NotInRegion(HolderMetricsError, ValueError):
    """A point is not a member of the grid region"""


class DisconnectedEndpoints(HolderMetricsError):
    """No grid path joins the two endpoints at the requested depth"""


class IntegralDiverged(HolderMetricsError):
    """A tail integral failed to settle under refinement"""


class NoCrossing(HolderMetricsError):
    """No ray crossed the circle |w| = r"""


class MissingAlpha(HolderMetricsError):
    """A Hölder estimate without an exponent was used where one is required"""


class DegenerateBoundary(HolderMetricsError):
    """The base point's boundary distance is not a positive finite number"""
