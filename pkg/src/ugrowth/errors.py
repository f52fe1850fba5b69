"""Exception hierarchy.

Every error belongs to one of three families, which the CLI maps to exit
codes: a certified negative answer (2), an exhausted budget (3) or an
invalid / unsupported input (4).
"""
from __future__ import annotations


class UGrowthError(Exception):
    exit_code = 1

    def to_record(self) -> dict:
        return {"error": type(self).__name__, "family": self.family, "message": str(self)}

    @property
    def family(self) -> str:
        return "error"


class CertifiedNegative(UGrowthError):
    """The computation finished and certifies a negative answer."""

    exit_code = 2

    @property
    def family(self) -> str:
        return "negative"


class BudgetError(UGrowthError):
    """A search or precision budget ran out before an answer was certified."""

    exit_code = 3

    @property
    def family(self) -> str:
        return "budget"


class InputError(UGrowthError, ValueError):
    exit_code = 4

    @property
    def family(self) -> str:
        return "input"


# -- input / unsupported -------------------------------------------------------
class InvalidPlace(InputError):
    pass


class QuadraticAtFinitePlace(InputError):
    pass


class MixedPlaceKinds(InputError):
    pass


class NotRealPlace(InputError):
    pass


class IncompatibleFields(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class Singular(InputError):
    pass


class BadDegree(InputError):
    pass


class NotInNormalForm(InputError):
    pass


class NotTriangularizableInField(InputError):
    pass


class EigenvalueNotRepresentable(InputError):
    pass


class UnknownPredicate(InputError):
    pass


class NotPrimePower(InputError):
    pass


class ReducibleModulus(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class ConjugatorBoundViolated(UGrowthError):
    """A postcondition that the construction guarantees did not certify."""


# -- certified negatives ------------------------------------------------------
class NoSpectralGap(CertifiedNegative):
    pass


class SlopeNotSeparated(CertifiedNegative):
    pass


class NoGapAnywhere(CertifiedNegative):
    pass


class BFixesE1(CertifiedNegative):
    pass


class LipschitzTooLarge(CertifiedNegative):
    pass


class SeparationTooSmall(CertifiedNegative):
    pass


class SeparationFailed(CertifiedNegative):
    pass


class NoProximalStructure(CertifiedNegative):
    pass


class AllPowersFix(CertifiedNegative):
    pass


class NoGrowthDetected(CertifiedNegative):
    pass


class NotDenseError(CertifiedNegative):
    pass


class DensityLost(CertifiedNegative):
    pass


class NoLoxodromicFound(CertifiedNegative):
    pass


class Exhausted(CertifiedNegative):
    pass


# -- budgets -------------------------------------------------------------------
class PrecisionExhausted(BudgetError):
    pass


class Inconclusive(BudgetError):
    pass


class SpectralGapUnresolved(BudgetError):
    pass


class BallExplosion(BudgetError):
    pass


class CapReached(BudgetError):
    pass


class BudgetExceeded(BudgetError):
    pass


class BudgetExhausted(BudgetError):
    pass


class ExponentBudgetExhausted(BudgetError):
    pass


class MemoryBudget(BudgetError):
    pass
