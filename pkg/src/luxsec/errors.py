"""Exception hierarchy shared by the simulator modules."""


class LuxsecError(Exception):
    """Base class for all simulator errors."""


class ZeroVector(LuxsecError, ValueError):
    pass


class GridOverflow(LuxsecError, ValueError):
    pass


class BadHalfAngle(LuxsecError, ValueError):
    pass


class DegenerateGeometry(LuxsecError, ValueError):
    pass


class ShapeMismatch(LuxsecError, ValueError):
    pass


class PowerSplitInfeasible(LuxsecError):
    """The power pair cannot meet the untrusted user's rate floor for any gain."""


class UntrustedUnreachable(LuxsecError):
    pass


class TrustedUnreachable(LuxsecError):
    pass


class RoundingInfeasible(LuxsecError):
    pass


class NoFeasiblePower(LuxsecError):
    pass


class OracleTooLarge(LuxsecError, ValueError):
    pass


class CampaignInfeasible(LuxsecError):
    pass


class ConfigNotFound(LuxsecError, FileNotFoundError):
    pass


class ConfigInvalid(LuxsecError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class OutputError(LuxsecError, OSError):
    pass
