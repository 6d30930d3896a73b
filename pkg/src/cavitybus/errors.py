"""Exception hierarchy for cavitybus.

Every error raised on purpose by the library derives from
:class:`CavityBusError`, so callers can catch the whole family at once.
Numerical failures additionally derive from :class:`NumericalError`, which
the command line maps to exit status 3.
"""

__all__ = [
    "CavityBusError",
    "NumericalError",
    "PoleProximity",
    "ResonanceDenominator",
    "RootCountMismatch",
    "SingularSystem",
    "ZeroEigenvalue",
    "EvenChainResonance",
    "UnsupportedSector",
    "DimensionMismatch",
    "ToleranceNotMet",
    "IntegratorDrift",
    "ZeroDetuning",
    "ConditionViolated",
    "ZeroTrace",
    "ConfigInvalid",
]


class CavityBusError(Exception):
    pass


class NumericalError(CavityBusError):
    pass


class PoleProximity(NumericalError, ValueError):
    """Energy argument sits on (or too close to) a pole of a resolvent."""


class ResonanceDenominator(NumericalError, ValueError):
    """A Dyson denominator ``1 - delta * G`` vanished."""


class RootCountMismatch(NumericalError):
    """The pole finder isolated fewer roots than there are sites."""


class SingularSystem(NumericalError):
    pass


class ZeroEigenvalue(NumericalError, ValueError):
    pass


class EvenChainResonance(NumericalError, ValueError):
    """Even chain with ``delta**2 == j**2``: the closed-form sums diverge."""


class UnsupportedSector(CavityBusError, ValueError):
    pass


class DimensionMismatch(CavityBusError, ValueError):
    pass


class ToleranceNotMet(NumericalError):
    pass


class IntegratorDrift(NumericalError):
    """Propagated density operator lost positivity beyond tolerance."""


class ZeroDetuning(CavityBusError, ValueError):
    pass


class ConditionViolated(CavityBusError, ValueError):
    pass


class ZeroTrace(NumericalError, ValueError):
    pass


class ConfigInvalid(CavityBusError, ValueError):
    """Configuration failed validation.

    ``errors`` holds one message per offending field, all of them collected
    before raising.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
