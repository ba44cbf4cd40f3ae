"""Exception types raised across the package."""


class So3AlignError(Exception):
    """Base class for every error raised by so3align."""


class DegenerateMatrix(So3AlignError, ValueError):
    """Projection onto SO(3) is not unique (rank < 2)."""


class NonConvergent(So3AlignError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class EmptySet(So3AlignError, ValueError):
    pass


class DegenerateMean(So3AlignError, ValueError):
    """The arithmetic mean of a spherical point set is (nearly) zero."""

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class MismatchedBins(So3AlignError, ValueError):
    pass


class InvalidMapping(So3AlignError, ValueError):
    pass


class AllHypothesesDegenerate(So3AlignError, ValueError):
    pass


class MissingTimestamps(So3AlignError, ValueError):
    pass


class EmptyPairing(So3AlignError, ValueError):
    pass


class ParseError(So3AlignError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonUnitQuaternion(ParseError):
    pass


class EmptyFile(So3AlignError, ValueError):
    pass
