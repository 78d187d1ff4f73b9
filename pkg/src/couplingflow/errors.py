"""Exception hierarchy shared by the solver modules."""


class CouplingFlowError(Exception):
    """Base class for all errors raised by this package."""


class RhsError(CouplingFlowError):
    """Raised while evaluating a right-hand side; aborts integration."""


class NearDegeneracyError(RhsError):
    """Two coupled levels came closer than the allowed gap floor."""

    def __init__(self, pair, gap, g=None):
        self.pair = tuple(int(p) for p in pair)
        self.gap = float(gap)
        self.g = g
        where = "" if g is None else f" at g={g:.6g}"
        super().__init__(
            f"levels {self.pair[0]} and {self.pair[1]} are coupled but "
            f"separated by only {self.gap:.3e}{where}"
        )


class ZeroRampRateError(RhsError):
    pass


class StepLimitExceeded(CouplingFlowError):
    pass


class StepUnderflow(CouplingFlowError):
    pass


class ChainMismatchError(CouplingFlowError):
    pass


class NoConvergenceError(CouplingFlowError):
    pass


class UnsupportedPowerError(NotImplementedError, CouplingFlowError):
    pass
