"""Exception taxonomy shared by all modules."""


class SwitchedNagumoError(Exception):
    """Base class for every error raised by this package."""


class NoEquilibria(SwitchedNagumoError):
    """mu is at or below the saddle/center birth threshold m0*."""


class HypothesisH0Violated(SwitchedNagumoError):
    """The positive-mean condition integral(F, 0, 1) > 0 fails (cubic: a >= 1/2)."""


class BelowHomoclinicThreshold(SwitchedNagumoError):
    """mu is at or below the homoclinic threshold m1*."""


class InvalidRegime(SwitchedNagumoError):
    """A weight is outside the regime the requested quantity is defined in."""


class OutOfRange(SwitchedNagumoError):
    """A scalar argument lies outside its admissible interval."""


class NoSolution(SwitchedNagumoError):
    """A bracketed root required by the construction does not exist."""


class WeightTooLarge(SwitchedNagumoError):
    """n0 * Lambda >= g, so the low-phase growth constant kappa is undefined."""


class EnergyOutOfBand(SwitchedNagumoError):
    """An energy level falls outside the closed-orbit band of the high system."""


class NotClosedOrbit(SwitchedNagumoError):
    """The requested level line is not a closed orbit around the center."""


class StepFailure(SwitchedNagumoError):
    """The adaptive integrator's step controller failed."""


class CenterSingularity(SwitchedNagumoError):
    """An orbit passed too close to the center for the angle rate to be finite."""


class DegenerateCrossing(SwitchedNagumoError):
    """A tangential axis contact prevents strict extremum classification."""


class RegimeViolation(SwitchedNagumoError):
    """The ordering n0 < m0* < m2* < n1 required by the construction fails."""


class AnchorOrderViolation(SwitchedNagumoError):
    """The anchors do not satisfy 0 < pbar0 < p0 < p*."""


class InclusionFailure(SwitchedNagumoError):
    """The upper rectangle is not contained in the quarter-annulus N_c."""


class ChartInversionFailure(SwitchedNagumoError):
    """The energy chart could not be inverted at the requested coordinates."""


class NoGap(SwitchedNagumoError):
    """The slow-transit inequality fails even for anchors next to 0 (internal)."""


class NotFound(SwitchedNagumoError):
    """No orbit matching the requested itinerary was found."""

    def __init__(self, message, matched_depth=0):
        super().__init__(message)
        self.matched_depth = matched_depth


class PolishDiverged(SwitchedNagumoError):
    """Newton polish left the search region and grid refinement also failed."""
