"""Exact numerics for the disordered pinning model in the delocalized regime."""

__version__ = "0.1.0"

from .renewal import (  # noqa: E402
    RenewalKernel,
    RenewalTrajectory,
    build_kernel,
    free_event_probability,
    renewal_mass,
    sample_free_renewal,
)
from .disorder import (  # noqa: E402
    Environment,
    GaussianLaw,
    TwoPointLaw,
    annealed_critical_point,
    h_t,
    krcost_threshold,
    log_mgf,
    rate_function,
    rich_segment_scan,
    sample_environment,
    tilt_level,
)
from .polymer import (  # noqa: E402
    EventSpec,
    PartitionTable,
    PolymerParams,
    build_partition_table,
    constrained_series,
    contact_statistics,
    event_log_partition,
    free_log_partition,
    gibbs_probability,
    reversed_series,
    trajectory_log_weight,
)
from .sampling import PathSample, sample_path, sample_paths  # noqa: E402
