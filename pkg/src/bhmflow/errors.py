"""Exception hierarchy shared across the solver modules."""


class BhmflowError(Exception):
    """Base class for all package-specific errors."""


class InvalidField(BhmflowError):
    """A field contains NaN/Inf values or has the wrong shape."""


class SpectrumError(BhmflowError):
    """A spectral array is not conjugate-symmetric enough to be real."""


class ArityError(BhmflowError):
    """Vector-field component count does not match the grid dimension."""


class GridError(BhmflowError):
    """Two fields that must share a grid do not."""


class ConfigError(BhmflowError):
    """Invalid solver or experiment configuration."""


class PositivityViolation(BhmflowError):
    """Solution dropped below the model's positivity floor.

    Carries the offending minimum value and its flat grid index.
    """

    def __init__(self, min_value, location, step=None, stage=None):
        self.min_value = float(min_value)
        self.location = tuple(int(i) for i in location)
        self.step = step
        self.stage = stage
        msg = f"min(u) = {self.min_value:.6g} at grid index {self.location}"
        if step is not None:
            msg += f" (step {step}"
            msg += f", stage {stage})" if stage is not None else ")"
        super().__init__(msg)


class BlowupDetected(BhmflowError):
    """Non-finite values appeared during operator evaluation."""

    def __init__(self, what="field", step=None, stage=None):
        self.step = step
        self.stage = stage
        msg = f"non-finite values in {what}"
        if step is not None:
            msg += f" (step {step}"
            msg += f", stage {stage})" if stage is not None else ")"
        super().__init__(msg)


class HeaderMismatch(BhmflowError):
    """Snapshot file header disagrees with the payload or expectations."""
