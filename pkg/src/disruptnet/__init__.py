"""Centralization analysis for bipartite user-community networks."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    BipartiteGraph,
    EmptyGraphError,
    GraphError,
    InvalidRecordError,
    RankKey,
    RemovalPlan,
    build_graph,
    largest_component,
    removal_plan,
    smallest_community_rank,
)
from .metrics import (  # noqa: E402
    DisruptionCurve,
    LocalCheegerCurve,
    dauc,
    disruption_curve,
    giant_component_curve,
    giant_component_sizes,
    local_cheeger_curve,
    population_curve,
)
from .generators import (  # noqa: E402
    GeneratorSpec,
    Topology,
    bipartite_ba,
    bipartite_er,
    bipartite_small_world,
    near_star,
    powerlaw_config,
    watts_strogatz,
)
from .unipartite import (  # noqa: E402
    Labels,
    UnipartiteGraph,
    convert,
    label_propagation,
    project_to_bipartite,
)
from .rewiring import (  # noqa: E402
    Correlation,
    Direction,
    RewiringTrace,
    projected_community_assortativities,
    rewire,
    rewiring_sweep,
    user_community_assortativity,
)
from .analytic import (  # noqa: E402
    CorrelationDirection,
    Distribution,
    JointDegreeModel,
    analytic_disruption,
    correlation_experiment,
    er_like_distributions,
    extreme_joint,
    random_joint,
    sample_finite_network,
    u_n,
)
from .spectral import CheegerEstimate, brute_force_cheeger, cheeger_bounds, lambda2  # noqa: E402
from .io import export_curve, ingest_edge_list  # noqa: E402
from .experiment import ExperimentConfig, ExperimentReport, run_experiment  # noqa: E402
