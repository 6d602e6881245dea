"""
Error types shared by every stage of the alignment toolkit.
Each error carries a short category used as the CLI's error prefix.
"""


class TernaryGameError(ValueError):
    """Base class for all toolkit errors"""

    category = 'error'

    def __str__(self):
        # CLI output is one line per failure
        return ' '.join(super().__str__().split())


class CapacityError(TernaryGameError):
    """Exact enumeration requested beyond the supported player count"""

    category = 'capacity'


class ArgumentError(TernaryGameError):
    """Invalid argument to an operation"""

    category = 'argument'


class ShapeError(TernaryGameError):
    """Dimension or shape mismatch between inputs"""

    category = 'shape'


class DegenerateInputError(TernaryGameError):
    """Input with no usable direction, e.g. a zero-norm vector"""

    category = 'degenerate'


class NonFiniteError(TernaryGameError):
    """NaN or infinite value where a finite one is required"""

    category = 'non-finite'


class ConfigError(TernaryGameError):
    """Configuration value outside its allowed range"""

    category = 'config'


class DivergenceError(TernaryGameError):
    """KL divergence is infinite for the given distributions"""

    category = 'divergence'


class ParseError(TernaryGameError):
    """Input file could not be parsed into the expected structure"""

    category = 'parse'
