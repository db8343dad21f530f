"""Exception hierarchy shared by all frontlab modules."""


class FrontlabError(Exception):
    """Base class for every error raised by frontlab."""


class DomainError(FrontlabError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DegenerateInputError(DomainError):
    """Input is formally valid but makes the requested quantity undefined."""


class InfeasibleError(DomainError):
    """A design target cannot be met with the given parameters."""


class ThresholdError(DomainError):
    """A coefficient sits on the wrong side of the critical threshold."""


class KinkError(DomainError):
    """Evaluation requested exactly at the C^1 junction of a comparison family."""


class SelectionError(FrontlabError, RuntimeError):
    """A parameter selection failed its own predicate re-verification.

    This should never happen; it signals a bug in a selection recipe.
    """


class StepRejected(FrontlabError):
    """A time step violates the stability bound of the explicit scheme."""


class NumericalFailure(FrontlabError):
    """Non-finite values appeared during integration.

    The offending state is attached so callers can dump it to disk.
    """

    def __init__(self, message, t=None, values=None):
        super().__init__(message)
        self.t = t
        self.values = values


class BudgetError(FrontlabError):
    """The configured step budget was exhausted before reaching the horizon."""


class WindowError(FrontlabError, ValueError):
    """Too few trace entries inside the requested fit window."""


class ConfigError(FrontlabError, ValueError):
    """A run configuration is malformed or inconsistent."""
