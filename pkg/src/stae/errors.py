"""Exception hierarchy shared across the package."""


class StaeError(Exception):
    pass


class ShapeError(StaeError, ValueError):
    """Tensor, weight or budget shapes do not line up."""


class FormatError(StaeError):
    """A serialized artifact (packet, clip, weight bundle) is malformed."""


class BadMagicError(FormatError):
    pass


class TruncatedError(FormatError):
    pass


class PopcountError(FormatError):
    """A mask's set-bit count disagrees with the declared pixel budget."""


class HuffmanOverrunError(FormatError):
    """The entropy-coded stream ends mid-symbol or holds an invalid code."""


class ProfileError(StaeError, ValueError):
    pass


class TraceCoverageError(StaeError, ValueError):
    """A channel trace does not cover the requested interval."""


class MissingWeightError(StaeError, KeyError):
    """A required array is absent from a weight bundle."""
