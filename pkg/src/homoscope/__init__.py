"""Exact and Monte Carlo tools for weighted H-colourings of bipartite graphs."""
from __future__ import annotations

from .bounds import (
    BoundCheckResult,
    DeficiencyReport,
    ExpansionReport,
    check_entropy_bound,
    check_expansion,
    check_gt_bound,
    check_tilt_inequality,
    deficiency,
    eta_lower_bound,
    kdd_eta_upper_bound,
    ub_diagnostic,
)
from .exact import (
    BudgetExceeded,
    Colouring,
    ColouringClass,
    EmptyHom,
    OccupancyDistribution,
    PartitionValue,
    blow_up,
    class_threshold,
    classify_colouring,
    convolve_distributions,
    count_homomorphisms,
    exact_sample,
    kab_occupancy_distribution,
    kdd_occupancy_distribution,
    kdd_partition_function,
    occupancy_distribution,
    partition_function,
)
from .extremal import (
    ExtremalReport,
    OccupancyInterval,
    SubsetPair,
    TiltedWeights,
    dominant_pairs,
    extremal_pairs,
    occupancy_interval,
    tilt,
)
from .mcmc import ChainConfig, ChainStats, glauber_step, init_pure, run_chain, single_site_kernel
from .model import (
    BipartiteHostGraph,
    ConstraintGraph,
    ModelFileError,
    WeightSystem,
    complete_bipartite,
    disjoint_union,
    even_cycle,
    load_model,
    percolate,
    preset_model,
    random_regular_bipartite,
    save_model,
)
from .scenarios import ScenarioConfig, ScenarioReport, run_scenario

__version__ = "0.1.0"
