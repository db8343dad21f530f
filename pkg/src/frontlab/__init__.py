"""Free-boundary experiments for the radial parabolic-elliptic Keller-Segel
system with degenerate diffusion, in mass-accumulation form."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetError,
    ConfigError,
    DomainError,
    FrontlabError,
    InfeasibleError,
    NumericalFailure,
    SelectionError,
    ThresholdError,
)
from .model import MassData, ModelParams, a_crit, c_crit, tail_to_mass_coefficient  # noqa: E402

__all__ = [
    "__version__",
    "ModelParams",
    "MassData",
    "a_crit",
    "c_crit",
    "tail_to_mass_coefficient",
    "FrontlabError",
    "DomainError",
    "InfeasibleError",
    "ThresholdError",
    "SelectionError",
    "NumericalFailure",
    "BudgetError",
    "ConfigError",
]
