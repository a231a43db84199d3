"""Exception types shared across the package."""


class LabelCollisionError(ValueError):
    """Two basis labels were mapped onto the same image by a permutation."""


class MalformedClassifierError(ValueError):
    """A scattering classifier returned a local index outside its block."""


class NotUnitaryError(ValueError):
    """A matrix failed the unitarity check."""


class RuleError(ValueError):
    """A QLGA rule is inconsistent with its cell specification."""


class SectorLeakageError(RuntimeError):
    """Probability mass left the single-particle sector."""

    def __init__(self, message, leakage):
        super().__init__(message)
        self.leakage = leakage


class TruncationError(ValueError):
    """A finite truncation cannot represent the requested evolution."""


class LabelMismatchError(TypeError):
    """A state's basis labels do not belong to the model being stepped."""
