"""Exception hierarchy shared by every module."""


class GenBoundsError(Exception):
    """Base class for all toolkit errors."""


class InvalidDistribution(GenBoundsError, ValueError):
    """Probabilities are negative, do not sum to one, or the support is malformed."""


class SupportMismatch(GenBoundsError, ValueError):
    pass


class AbsoluteContinuityViolation(GenBoundsError, ValueError):
    """P puts mass where Q has none, so D(P||Q) is infinite."""


class MetricUndefined(GenBoundsError, ValueError):
    pass


class InfeasibleLP(GenBoundsError, RuntimeError):
    """The transport LP failed. Marginals are always feasible, so this is a bug."""


class IndexOutOfRange(GenBoundsError, IndexError):
    pass


class AlphabetMismatch(GenBoundsError, ValueError):
    pass


class DataDistMismatch(GenBoundsError, ValueError):
    pass


class SizeCapExceeded(GenBoundsError, ValueError):
    pass


class NonIIDInput(GenBoundsError, ValueError):
    """A bound that assumes i.i.d. training samples was asked about a non-i.i.d. P_S."""


class NegativeDivergence(GenBoundsError, ValueError):
    pass


class JsOutOfRange(GenBoundsError, ValueError):
    pass


class NonPositiveDefinite(GenBoundsError, ValueError):
    pass


class DegenerateCorrelation(GenBoundsError, ValueError):
    pass


class NumericGuardError(GenBoundsError, ArithmeticError):
    """A quadrature self-check failed; results on this grid are not trustworthy."""


class WindowTooSmall(NumericGuardError):
    pass


class NormalizationDrift(NumericGuardError):
    pass
