class ConfigError(ValueError):
    pass


class DomainError(ValueError):
    pass


class InfeasibleBudgetError(ValueError):
    def __init__(self, message: str, constraint: str = "u > (p+q)M") -> None:
        super().__init__(message)
        self.constraint = constraint


class ConvergenceError(ArithmeticError):
    pass
