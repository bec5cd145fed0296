"""Learning classifier systems: ZCS, XCS, UCS, XCSC and XCSF engines with a shared harness."""

from .core import (
    ConfigurationError,
    GaOperatorParams,
    InputError,
    LCSError,
    Population,
    RandomStream,
    SelectionError,
    TernaryCondition,
    matches,
    roulette,
    specificity,
)
from .envs import (
    ClusterEnv,
    ClusterGenerator,
    FunctionEnv,
    FunctionTask,
    MazeWorld,
    MultiplexerEnv,
    MultiplexerTask,
    func_eval,
    mux_eval,
)
from .harness import ExperimentConfig, run_experiment, run_replicas
from .persist import load_population, save_population
from .ucs import UCS, UcsParams
from .xcs import XCS, XcsParams
from .xcsc import XCSC, XcscParams, extract_clusters
from .xcsf import XCSF, XcsfParams
from .zcs import ZCS, ZcsParams

__version__ = "0.1.0"

__all__ = [
    "ClusterEnv", "ClusterGenerator", "ConfigurationError", "ExperimentConfig", "FunctionEnv",
    "FunctionTask", "GaOperatorParams", "InputError", "LCSError", "MazeWorld", "MultiplexerEnv",
    "MultiplexerTask", "Population", "RandomStream", "SelectionError", "TernaryCondition", "UCS",
    "UcsParams", "XCS", "XCSC", "XCSF", "XcsParams", "XcscParams", "XcsfParams", "ZCS", "ZcsParams",
    "extract_clusters", "func_eval", "load_population", "matches", "mux_eval", "roulette",
    "run_experiment", "run_replicas", "save_population", "specificity",
]
