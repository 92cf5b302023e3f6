"""QoS-guaranteed NOMA power allocation for indoor optical wireless cells.

The library models Lambertian line-of-sight channels, decode-and-cancel
rates with residual interference, and gradient-projection solvers for
sum-rate and max-min power allocation, plus a frequency-reuse network
layer and Monte Carlo experiment runners.
"""

from .channel import (
    ChannelParams,
    LinkGeometry,
    channel_gain,
    concentrator_gain,
    lambertian_order,
)
from .config import (
    EXPERIMENT_NAMES,
    NORMALIZED_GAIN_UNIT,
    ConfigError,
    ExperimentConfig,
    load_config,
)
from .experiments import ResultTable, deploy_users, run_experiment
from .network import (
    AreaClass,
    Assignment,
    CellReport,
    NetworkScene,
    VapNode,
    assign_users,
    build_grid_scene,
    cell_radius,
    cell_throughput,
    classify,
    color_grid,
)
from .noma import (
    CumulativePower,
    LinkBudget,
    PowerAllocation,
    UserSet,
    from_cumulative,
    m_coefficient,
    noma_power_ordered,
    qos_satisfied,
    rate_k_to_j,
    rate_vector,
    sic_ordering_check,
    to_cumulative,
)
from .optimizer import (
    FeasibleRegion,
    InfeasibleError,
    SolveResult,
    SolverConfig,
    brute_force_oracle,
    build_feasible_region,
    check_feasibility,
    maximize_min_rate,
    maximize_sum_rate,
    project,
    softmin,
    softmin_gradient,
    sum_rate_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "LinkGeometry",
    "channel_gain",
    "concentrator_gain",
    "lambertian_order",
    "EXPERIMENT_NAMES",
    "NORMALIZED_GAIN_UNIT",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "ResultTable",
    "deploy_users",
    "run_experiment",
    "AreaClass",
    "Assignment",
    "CellReport",
    "NetworkScene",
    "VapNode",
    "assign_users",
    "build_grid_scene",
    "cell_radius",
    "cell_throughput",
    "classify",
    "color_grid",
    "CumulativePower",
    "LinkBudget",
    "PowerAllocation",
    "UserSet",
    "from_cumulative",
    "m_coefficient",
    "noma_power_ordered",
    "qos_satisfied",
    "rate_k_to_j",
    "rate_vector",
    "sic_ordering_check",
    "to_cumulative",
    "FeasibleRegion",
    "InfeasibleError",
    "SolveResult",
    "SolverConfig",
    "brute_force_oracle",
    "build_feasible_region",
    "check_feasibility",
    "maximize_min_rate",
    "maximize_sum_rate",
    "project",
    "softmin",
    "softmin_gradient",
    "sum_rate_gradient",
    "__version__",
]
