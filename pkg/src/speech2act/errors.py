"""Exception types shared across the package."""


class Speech2ActError(Exception):
    """Base class for all structured errors raised by this package."""


class ShapeError(Speech2ActError, ValueError):
    """Operand shapes do not conform for an operation."""


class GradientError(Speech2ActError, ValueError):
    """A gradient is non-finite or a backward precondition is violated."""


class VocabularyError(Speech2ActError, ValueError):
    """Invalid vocabulary or tag-set construction/lookup."""


class CorpusError(Speech2ActError, ValueError):
    """Malformed manifest, feature file, or corpus structure."""


class ConfigError(Speech2ActError, ValueError):
    """An experiment or model configuration failed validation."""
