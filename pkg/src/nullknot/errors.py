"""Exception hierarchy.

Every error raised by the library derives from :class:`NullKnotError`. The
CLI maps :class:`ConfigError` to exit code 2, :class:`NumericError` to 3 and
:class:`SnapshotFormatError` to 4.
"""


class NullKnotError(Exception):
    pass


class ConfigError(NullKnotError):
    pass


class SnapshotFormatError(NullKnotError):
    pass


class NumericError(NullKnotError):
    pass


class PoleError(NumericError):
    pass


class DegenerateFlowError(NumericError):
    """Energy density too small for the normalized Poynting field."""


class NotNullError(NumericError):
    pass


class NotDivergenceFreeError(NumericError):
    pass


class NonzeroMeanError(NumericError):
    pass


class ZeroModulusError(NumericError):
    pass


class ZeroPsiError(ZeroModulusError):
    pass


class DegenerateDirectionError(NumericError):
    pass


class NoConvergenceError(NumericError):
    def __init__(self, msg, residual=None, line=None):
        super().__init__(msg)
        self.residual = residual
        self.line = line


class SingularJacobianError(NumericError):
    pass


class BranchJumpError(NumericError):
    def __init__(self, msg, line=None):
        super().__init__(msg)
        self.line = line


class DegenerateSeedError(NumericError):
    pass


class StepFailureError(NumericError):
    pass
