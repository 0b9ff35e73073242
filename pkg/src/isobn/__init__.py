"""Order-constrained parameter learning for binary Bayesian networks.

Expert-supplied qualitative influences (+, -, 0, optionally context-specific)
become order constraints on each variable's conditional probabilities; the
constrained estimates are computed by isotonic regression with the minimum
lower sets algorithm.
"""

from isobn.errors import (
    FeasibilityError,
    InternalInvariantError,
    IsobnError,
    NetworkError,
    PriorError,
    ParseError,
    SignError,
)
from isobn.model import Network, joint_distribution, parent_configurations, validate_network
from isobn.signs import (
    ConfigOrder,
    Sign,
    SignedInfluence,
    build_order,
    check_isotonic,
    condense,
    immediate_order_pairs,
)
from isobn.isotonic import (
    IsotonicProblem,
    IsotonicSolution,
    lower_set_count,
    lower_sets,
    mls_solve,
    oracle_solve,
    pav_solve,
    weighted_average,
)
from isobn.estimation import (
    BasicEstimates,
    BetaPrior,
    CountTable,
    FittedNetwork,
    VariableFit,
    count_table,
    fit_network,
    fit_variable,
    map_basic,
    ml_basic,
)
from isobn.dataset import Dataset
from isobn.simulate import (
    ExperimentSummary,
    kl_divergence,
    logic_sample,
    reference_network,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BasicEstimates",
    "BetaPrior",
    "ConfigOrder",
    "CountTable",
    "Dataset",
    "ExperimentSummary",
    "FeasibilityError",
    "FittedNetwork",
    "InternalInvariantError",
    "IsobnError",
    "IsotonicProblem",
    "IsotonicSolution",
    "Network",
    "NetworkError",
    "ParseError",
    "PriorError",
    "Sign",
    "SignError",
    "SignedInfluence",
    "VariableFit",
    "build_order",
    "check_isotonic",
    "condense",
    "count_table",
    "fit_network",
    "fit_variable",
    "immediate_order_pairs",
    "joint_distribution",
    "kl_divergence",
    "logic_sample",
    "lower_set_count",
    "lower_sets",
    "map_basic",
    "ml_basic",
    "mls_solve",
    "oracle_solve",
    "parent_configurations",
    "pav_solve",
    "reference_network",
    "run_experiment",
    "validate_network",
    "weighted_average",
]
