"""Exception hierarchy shared by every ocksr module."""


class OCKSRError(Exception):
    """Base class for domain errors raised by ocksr."""


class DimensionMismatch(OCKSRError, ValueError):
    pass


class NotPositiveDefinite(OCKSRError, ValueError):
    """A Cholesky pivot fell below the positive-definiteness threshold."""

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NoConvergence(OCKSRError, RuntimeError):
    pass


class ZeroVector(OCKSRError, ValueError):
    pass


class DuplicateSamples(OCKSRError, ValueError):
    """Two training rows coincide; ``pairs`` lists the offending index pairs."""

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)


class DegenerateData(OCKSRError, ValueError):
    pass


class ZeroSample(OCKSRError, ValueError):
    pass


class InvalidSpectrum(OCKSRError, ValueError):
    pass


class NumericalBreakdown(OCKSRError, RuntimeError):
    def __init__(self, message, active_set=()):
        super().__init__(message)
        self.active_set = list(active_set)


class EmptyPath(OCKSRError, ValueError):
    pass


class InvalidCounts(OCKSRError, ValueError):
    pass


class EmptyInput(OCKSRError, ValueError):
    pass


class MalformedModelFile(OCKSRError, ValueError):
    pass


class SingleClass(OCKSRError, ValueError):
    pass


class InsufficientPool(OCKSRError, ValueError):
    pass


class InvalidK(OCKSRError, ValueError):
    pass


class ParseError(OCKSRError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonBinaryLabel(OCKSRError, ValueError):
    pass
