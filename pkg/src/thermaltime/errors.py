"""Exception hierarchy.

Every error raised on bad physical input derives from :class:`ThermalTimeError`,
which is itself a ``ValueError`` so callers that only care about "bad input"
can catch the builtin.
"""


class ThermalTimeError(ValueError):
    pass


class SpectrumError(ThermalTimeError):
    """Malformed spectrum input (non-coprime ratio, wrong ordering, ...)."""


class DegeneracyError(SpectrumError):
    pass


class CapacityError(SpectrumError):
    """Grid indices exceed the supported integer range."""


class ResolutionError(SpectrumError):
    """Clock period too short to resolve the requested level density."""

    def __init__(self, message, required_T=None):
        super().__init__(message)
        self.required_T = required_T


class NoStatesError(ThermalTimeError):
    pass


class ShellOverlapError(ThermalTimeError):
    """Shell width not smaller than the system gap, so windows would collide."""


class EmptyShellError(ThermalTimeError):
    pass


class ResonanceError(ThermalTimeError):
    """No clock level sits exactly at E - E_j for a populated system level."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class AliasingError(ThermalTimeError):
    """Time grid too coarse for the discrete frame identities to be exact."""


class UndefinedFidelityError(ThermalTimeError):
    pass


class UnconditionedTimeError(ThermalTimeError):
    """The clock never shows the requested reading in the given state."""


class UndefinedConditionalError(ThermalTimeError):
    pass


class DimensionMismatchError(ThermalTimeError):
    pass
