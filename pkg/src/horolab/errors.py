"""Exception hierarchy shared by all horolab modules."""


class HorolabError(Exception):
    """Base class for every error raised by the package."""


class ContractViolation(HorolabError, ValueError):
    """An input broke an operation's precondition (wrong base point, bad field, ...)."""


class PreconditionError(ContractViolation):
    pass


class DomainError(HorolabError, ValueError):
    """A point or radius lies outside the region where the operation is defined."""


class ConjugatePointError(DomainError):
    pass


class AccuracyError(HorolabError, ArithmeticError):
    """A numerical integration exceeded its accuracy budget."""


class ShootingError(AccuracyError):
    """Newton shooting for the inverse exponential map did not converge."""

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class UsageError(HorolabError):
    """Invalid experiment configuration; ``line`` points at the offending input line."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
