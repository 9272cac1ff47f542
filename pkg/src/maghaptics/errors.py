"""Exception types shared across the package."""


class MagHapticsError(Exception):
    """Base class for all package-specific errors."""


class SingularPoint(MagHapticsError):
    """Field requested on (or numerically at) a filament loop."""


class InsideWinding(MagHapticsError):
    """Field requested inside or within 1 mm of a winding cross-section."""


class OutOfWorkspace(MagHapticsError):
    """Position outside the cylindrical workspace or too close to a winding."""


class OutOfGrid(MagHapticsError):
    """Query outside the stored force-map domain."""


class FormatError(MagHapticsError):
    """Malformed force-map file: bad magic, version, layout, or checksum."""


class Infeasible(MagHapticsError):
    """Requested force exceeds the combined authority of all six coils.

    Carries the best-effort saturated allocation so callers can still
    drive the coils at their limit.
    """

    def __init__(self, residual, duties=None, achieved=None):
        super().__init__(f"requested force infeasible, residual {residual:+.6g} N")
        self.residual = residual
        self.duties = duties
        self.achieved = achieved


class FrameError(MagHapticsError):
    """Malformed serial duty frame."""


class BadLength(FrameError):
    pass


class BadSync(FrameError):
    pass


class BadChecksum(FrameError):
    pass


class EmptyTrajectory(MagHapticsError):
    """Tracker playback requested for a trajectory with no keyframes."""
