from .config import default_config, init_config, load_config, save_config
from .errors import ConfigError, ConvergenceError, DomainError, InfeasibleBudgetError
from .fading import ChannelModel
from .fbcode import CodeSpec
from .montecarlo import McConfig, McEstimate
from .schema import EvalParams, SweepSpec
from .schemes import SchemeEvaluation
from .timing import ProtocolBudget

__all__ = [
    "ChannelModel",
    "CodeSpec",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "EvalParams",
    "InfeasibleBudgetError",
    "McConfig",
    "McEstimate",
    "ProtocolBudget",
    "SchemeEvaluation",
    "SweepSpec",
    "default_config",
    "init_config",
    "load_config",
    "save_config",
]
