"""Exception types raised across the package."""


class ContractError(ValueError):
    """An argument violates an operation's precondition."""


class SingularityError(ArithmeticError):
    """A multiplier is singular at a frequency that carries mass.

    Raised for negative-order homogeneous operators applied to fields
    with a non-negligible zero mode.
    """


class InfiniteMomentError(ArithmeticError):
    """A Levy-measure moment or total mass diverges."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``field`` holds the dotted path of the offending entry.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
