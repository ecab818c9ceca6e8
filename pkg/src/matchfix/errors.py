"""Exception hierarchy shared by the library and the CLI."""


class MatchfixError(ValueError):
    """Base class for every error raised by this package."""


class ParseError(MatchfixError):
    pass


class DimensionMismatch(ParseError):
    pass


class AntisymmetryViolation(ParseError):
    pass


class SelfPlay(ParseError):
    pass


class IndexOutOfRange(MatchfixError):
    pass


class CoalitionTooLarge(MatchfixError):
    pass


class InvalidParameters(MatchfixError):
    pass


class LimitExceeded(MatchfixError):
    pass


class NotPowerOfTwo(MatchfixError):
    pass


class PlayerSetMismatch(MatchfixError):
    pass


class NotBadBracket(MatchfixError):
    pass


class InvalidDistribution(MatchfixError):
    pass


class UnknownRule(MatchfixError):
    pass


class VerificationFailure(MatchfixError):
    pass
