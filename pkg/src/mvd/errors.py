"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from MvdError so the CLI can map
"our" failures to exit code 2 and let genuine bugs surface as tracebacks.
"""


class MvdError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MvdError):
    """Malformed container (bad RIFF header, truncated chunk, bad CSV)."""


class UnsupportedFormat(MvdError):
    """Well-formed file in a codec/layout this toolkit does not handle."""


class InvalidDataset(MvdError):
    """Manifest or dataset violates a structural requirement."""


class InvalidSpec(MvdError):
    """Synthetic-dataset spec violates its invariants (e.g. Nyquist)."""


class UpsampleUnsupported(MvdError):
    """Resample target above the source rate."""


class InvalidRate(MvdError):
    """Non-positive or otherwise unusable sample rate."""


class InvalidDepth(MvdError):
    """Bit depth outside [1, source depth]."""


class InvalidLength(MvdError):
    """Non-positive clip length."""


class FilterbankDegenerate(MvdError):
    """Mel filterbank has an all-zero row at this FFT resolution."""


class InvalidInput(MvdError):
    """Operation input violates a precondition (empty set, dim mismatch)."""


class InsufficientClassSize(MvdError):
    """A class has fewer members than the requested fold count."""


class InsufficientPoints(MvdError):
    """Knee detection needs at least three curve points."""


class InvalidCurve(MvdError):
    """Curve points are not strictly increasing in cost."""


class InvalidBaseline(MvdError):
    """Config exceeds the cost baseline on some axis."""


class InvalidBudget(MvdError):
    """Non-positive fleet budget."""


class ConfigFailed(MvdError):
    """Every clip failed to process for one sweep configuration."""
