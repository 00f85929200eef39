"""Exception types shared across the package."""


class ConvArithError(Exception):
    """Base class for all errors raised by convarith."""


class InvalidGeometry(ConvArithError, ValueError):
    """Hyperparameters describe a layer that cannot be evaluated.

    Raised when the kernel cannot be placed even once, when a derived
    size would be zero or negative, or when a parameter is out of range.
    """


class ShapeMismatch(ConvArithError, ValueError):
    """Tensor shapes disagree with each other or with a layer description."""
