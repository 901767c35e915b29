"""Exception types shared across the toolkit."""


class SafecutError(Exception):
    """Base class for all safecut errors."""


class ParseError(SafecutError):
    """Malformed network / bounds / query / dataset file."""


class ShapeError(SafecutError):
    """Dimension mismatch between layers, vectors, or bound sets."""


class EmptyDatasetError(SafecutError):
    """Operation requires at least one sample."""


class UnlabeledDataError(SafecutError):
    """Operation requires a fully labeled dataset."""


class DegenerateLabelsError(SafecutError):
    """Binary training data contains only one class."""


class NumericalBreakdownError(SafecutError):
    """LP solve could not proceed reliably (tiny pivots, stall)."""


class UnsupportedLayerError(SafecutError):
    """Verification suffix contains a layer kind the encoder cannot handle."""


class UnboundedBigMError(SafecutError):
    """Interval propagation produced an infinite ReLU pre-activation bound."""


class InvalidDeltaError(SafecutError):
    """Confidence parameter outside (0, 1)."""
