"""Exception hierarchy for nft_toolkit."""


class NFTError(Exception):
    """Base class for all toolkit errors."""


class DuplicateEigenvalueError(NFTError, ValueError):
    """Two eigenvalues of a discrete spectrum (nearly) coincide."""


class SpectrumFormatError(NFTError, ValueError):
    """A spectrum or pulse file could not be parsed."""


class ScatteringOverflowError(NFTError, OverflowError):
    """The exponential factor exp(2*Im(lambda)*t) exceeds double range."""


class SingularSplitError(NFTError, ArithmeticError):
    """R11 vanishes at the chosen split point."""


class DegenerateEigenvalueError(NFTError, ArithmeticError):
    """a'(lambda) is too small for Q_d = b / a' to be meaningful."""


class DarbouxSingularityError(NFTError, ArithmeticError):
    """The ratio update of the Darboux recursion hit a zero denominator."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
