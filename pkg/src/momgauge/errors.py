"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, config or parameter values."""


class LocalizationError(ConfigurationError):
    """A test state is not localized away from the periodic grid boundary."""


class GridMismatchError(ValueError):
    """Operators or states defined on different grids were combined."""


class SingularEvaluationError(ArithmeticError):
    """A gauge configuration was evaluated on its singular set."""


class HermiticityError(ValueError):
    """Matrix is not Hermitian within tolerance."""
