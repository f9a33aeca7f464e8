"""Exception hierarchy shared by all sigfst modules.

``InputError`` subclasses signal bad user-supplied data (malformed files,
out-of-range values, unknown names) and map to CLI exit code 2.
``NoValidParse`` has its own exit code (3) because an over-constrained
grammar is an expected outcome, not a file-format problem.
"""


class SigfstError(Exception):
    """Base class for every error raised by this package."""


class InputError(SigfstError):
    """Bad user input: unparseable or semantically invalid data."""


# fst core ------------------------------------------------------------------

class AlphabetMismatch(InputError):
    """Symbol tables of composed machines are incompatible."""


class DivergentWeights(SigfstError):
    """A cycle with positive log weight makes the best path unbounded."""


class CyclicMachine(SigfstError):
    """No topological order exists, so path sums are undefined."""


# parsing -------------------------------------------------------------------

class ParseError(InputError):
    """Structured document violates its schema.

    ``location`` should pinpoint the offending line or field when known.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class DuplicateLabel(ParseError):
    pass


class UnknownPatternCode(ParseError):
    """Pattern code outside the four known temporal patterns (0-3)."""


class UnknownLabel(InputError):
    """A grammar edge names an action absent from the vocabulary."""


# observation traces --------------------------------------------------------

class MalformedRow(ParseError):
    pass


class NonMonotonicFrames(InputError):
    """Frame indices must be strictly increasing."""


class OutOfRangeProbability(InputError):
    """Attribute probabilities must lie in [0, 1]."""


class UnknownAttribute(InputError):
    """A signature references an attribute missing from the trace."""


class EmptyTrace(InputError):
    pass


# segmental decoding --------------------------------------------------------

class NoValidParse(SigfstError):
    """The grammar admits no label sequence that tiles the trace."""


class UnknownLabelInGrammar(InputError):
    """The grammar alphabet is not a subset of the signature labels."""


# metrics -------------------------------------------------------------------

class LengthMismatch(InputError):
    pass


class EmptyClassSet(InputError):
    pass


# synthetic benchmarks ------------------------------------------------------

class InfeasiblePlan(InputError):
    """A segment is too short to realize its pattern (Start/End need >= 2 frames)."""


class EnumerationTooLarge(SigfstError):
    """Brute-force oracle would exceed its enumeration bound."""
