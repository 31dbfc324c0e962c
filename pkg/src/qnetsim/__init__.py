"""Discrete event simulation of open restricted queueing networks.

Seeded, reproducible trials over multi-class networks with Type I blocking,
priorities, batch arrivals, baulking, cyclic server schedules, dynamic class
changes, and online deadlock detection.
"""

from .analytics import InstabilityError, MMcParams, erlang_c, mean_wait
from .deadlock import DeadlockReport, StateDigraph
from .distributions import (
    Continuous,
    Deterministic,
    Discrete,
    Distribution,
    Empirical,
    Exponential,
    Gamma,
    Lognormal,
    NoArrivals,
    RandomStream,
    Sequential,
    TimeDependent,
    Triangular,
    TruncatedNormal,
    Uniform,
    Weibull,
    sample_batch_size,
    seed_stream,
)
from .engine import ArrivalNode, ExitNode, Individual, Node, Server, Simulation, StarvationError
from .network import (
    ConfigError,
    CustomerClass,
    Network,
    NetworkConfig,
    Schedule,
    ServiceCentre,
    ThresholdBaulking,
    ValidationError,
    exit_probability,
    load_network,
    parse_config,
    serialize_config,
    validate,
)
from .records import DataRecord, Summary, filter_records, read_csv, summarize, write_csv

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "RandomStream",
    "seed_stream",
    "Distribution",
    "Uniform",
    "Deterministic",
    "Triangular",
    "Exponential",
    "Gamma",
    "TruncatedNormal",
    "Lognormal",
    "Weibull",
    "Discrete",
    "Continuous",
    "Empirical",
    "Sequential",
    "TimeDependent",
    "NoArrivals",
    "sample_batch_size",
    # network
    "Network",
    "NetworkConfig",
    "ServiceCentre",
    "CustomerClass",
    "Schedule",
    "ThresholdBaulking",
    "parse_config",
    "serialize_config",
    "validate",
    "load_network",
    "exit_probability",
    "ConfigError",
    "ValidationError",
    # engine
    "Simulation",
    "Node",
    "Server",
    "Individual",
    "ArrivalNode",
    "ExitNode",
    "StarvationError",
    # deadlock
    "StateDigraph",
    "DeadlockReport",
    # records
    "DataRecord",
    "Summary",
    "filter_records",
    "summarize",
    "write_csv",
    "read_csv",
    # analytics
    "MMcParams",
    "erlang_c",
    "mean_wait",
    "InstabilityError",
]
