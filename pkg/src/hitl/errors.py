"""Exception types raised across the package."""


class InvalidGridError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    """State became non-finite during integration."""

    def __init__(self, step):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


class InvalidScheduleError(ValueError):
    pass


class InvalidThresholdError(ValueError):
    pass


class InvalidInputError(ValueError):
    pass


class InvalidRangeError(ValueError):
    pass


class DegenerateSurfaceError(RuntimeError):
    pass


class ConfigError(ValueError):
    """Config failed to parse or validate.

    ``problems`` holds every failure found, not only the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
