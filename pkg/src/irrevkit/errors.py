"""Exception hierarchy shared by all irrevkit modules."""


class IrrevkitError(Exception):
    """Base class for every error raised by this package."""


class CompositeSpaceError(IrrevkitError):
    """Label bookkeeping failure: duplicate or unknown tensor-factor labels."""


class ShapeError(IrrevkitError):
    """Operator dimensions incompatible with the declared spaces."""


class StateValidityError(IrrevkitError):
    """Matrix is not a density matrix within tolerance."""


class BranchProbabilityError(IrrevkitError):
    """A sub-normalized branch has vanishing probability on a test state."""


class OutcomeFunctionError(IrrevkitError):
    """Outcome-value assignment does not cover every instrument outcome."""


class BlochError(IrrevkitError):
    """Bloch vector fails the norm requirements."""


class DistributionError(IrrevkitError):
    """Discrete distributions with mismatched total mass."""


class ExtractionError(IrrevkitError):
    """Small-coupling extraction failed; carries grid diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConservationError(IrrevkitError):
    """Implementation violates the conservation law or misses its target channel."""


class YanaseConditionError(IrrevkitError):
    """Pointer charge does not commute with the pointer basis."""


class AssumptionError(IrrevkitError):
    """Input violates an assumption required for the requested evaluation."""
