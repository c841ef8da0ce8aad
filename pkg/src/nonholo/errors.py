"""Exception types shared across the engine.

Each carries a ``category`` used by the command line front-end to pick an
exit code (``model`` -> 3, ``numerical`` -> 4).
"""


class NonholoError(Exception):
    category = "model"


class DomainError(NonholoError, ValueError):
    """A primitive was evaluated outside its domain."""

    category = "numerical"

    def __init__(self, primitive: str, value: float):
        self.primitive = primitive
        self.value = value
        super().__init__(f"{primitive} evaluated outside its domain at {value!r}")


class DimensionError(NonholoError, ValueError):
    pass


class ModelError(NonholoError, ValueError):
    pass


class SingularConstraintsError(NonholoError):
    def __init__(self, rank: int, expected: int):
        self.rank = rank
        self.expected = expected
        super().__init__(f"constraint matrix has numerical rank {rank}, expected {expected}")


class DegenerateChartError(NonholoError):
    """Mass metric is not positive definite: the chart is not an immersion."""

    category = "numerical"


class SingularReductionError(NonholoError):
    category = "numerical"

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class NonFiniteSystemError(SingularReductionError):
    """The assembled system contains inf or nan entries."""


class DegenerateConstraintError(SingularReductionError):
    """Augmented multiplier system is singular."""


class UnsupportedFormulationError(NonholoError):
    pass


class NotCaplyginError(NonholoError):
    def __init__(self, what: str, magnitude: float):
        self.what = what
        self.magnitude = magnitude
        super().__init__(f"not a Caplygin system: {what} (sampled partial {magnitude:.3e})")


class DivergenceError(NonholoError):
    category = "numerical"

    def __init__(self, message: str, last_sample=None):
        self.last_sample = last_sample
        super().__init__(message)
