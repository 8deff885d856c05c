"""twinlab: a laboratory for twin-width on random graphs.

Packed-bitset trigraphs with red/black edge planes, an exact
branch-and-bound solver with verifying witnesses, a three-phase
contraction schedule for dense G(n,p), closed-form width predictions
and tail bounds, and a deterministic experiment harness.
"""

from ._backend import COMPILED, backend_name
from .contraction import (ContractionSequence, SequenceError, SequenceTrace,
                          apply_sequence, read_sequence, verify_width,
                          write_sequence)
from .numerics import (LowerBoundCertificate, Prediction, TailBoundQuery,
                       alpha, alpha2, beta, beta2, binom_lower_bound,
                       binom_upper_bound, certified_lower_bound,
                       count_low_pairs, exact_binom_cdf, p_star,
                       predicted_dense_width, predicted_lower_dense,
                       predicted_sparse_lower, predicted_sparse_upper)
from .randgen import RandomGraphSpec, bipartite_gnp, gnp, random_cograph
from .solver import (ExactResult, brute_force_twin_width, decide_tww_le,
                     exact_twin_width, greedy_sequence)
from .strategy import (ScheduleTrace, StrategyParams, b_family, b_set,
                       detect_frozen, run_paper_schedule, schedule_params,
                       select_a_pairs)
from .trigraph import (ParseError, Trigraph, VertexPartition,
                       bipartite_red_degree, complement, contract,
                       contraction_red_degree, from_edge_list, max_red_degree,
                       quotient, read_graph, red_degree, write_graph)

__version__ = "0.1.0"

__all__ = [
    "COMPILED", "backend_name",
    "ContractionSequence", "SequenceError", "SequenceTrace",
    "apply_sequence", "read_sequence", "verify_width", "write_sequence",
    "LowerBoundCertificate", "Prediction", "TailBoundQuery",
    "alpha", "alpha2", "beta", "beta2",
    "binom_lower_bound", "binom_upper_bound", "certified_lower_bound",
    "count_low_pairs", "exact_binom_cdf", "p_star",
    "predicted_dense_width", "predicted_lower_dense",
    "predicted_sparse_lower", "predicted_sparse_upper",
    "RandomGraphSpec", "bipartite_gnp", "gnp", "random_cograph",
    "ExactResult", "brute_force_twin_width", "decide_tww_le",
    "exact_twin_width", "greedy_sequence",
    "ScheduleTrace", "StrategyParams", "b_family", "b_set",
    "detect_frozen", "run_paper_schedule", "schedule_params",
    "select_a_pairs",
    "ParseError", "Trigraph", "VertexPartition",
    "bipartite_red_degree", "complement", "contract",
    "contraction_red_degree", "from_edge_list", "max_red_degree",
    "quotient", "read_graph", "red_degree", "write_graph",
    "__version__",
]
