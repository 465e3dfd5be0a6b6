"""Secrecy rate regions and sum capacity of the degraded Gaussian multiple-access wiretap channel."""

from .channel import (ChannelModelError, ConfigError, NotDegradable, NotDegraded,
                      RawChannelConfig, StandardChannel, load_channel, standardize,
                      to_degraded_standard)
from .regions import (RegionSpec, SumCapacity, TdmaSchedule, UnsupportedDimension,
                      collective_region, gmac_region, individual_region, region_contains,
                      sum_capacity, tdma_contains, tdma_max_sum_rate, tdma_optimal_schedule,
                      tdma_user_bound)
from .simulator import (CapExceeded, ExperimentConfig, Infeasible, SimulationReport,
                        estimate_equivocation, generate_codebooks, run_experiment, split_rates)

__version__ = "0.1.0"

__all__ = [
    "CapExceeded", "ChannelModelError", "ConfigError", "ExperimentConfig", "Infeasible",
    "NotDegradable", "NotDegraded", "RawChannelConfig", "RegionSpec", "SimulationReport",
    "StandardChannel", "SumCapacity", "TdmaSchedule", "UnsupportedDimension",
    "collective_region", "estimate_equivocation", "generate_codebooks", "gmac_region",
    "individual_region", "load_channel", "region_contains", "run_experiment",
    "split_rates", "standardize", "sum_capacity", "tdma_contains", "tdma_max_sum_rate",
    "tdma_optimal_schedule", "tdma_user_bound", "to_degraded_standard",
]
