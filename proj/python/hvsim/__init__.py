"""Hidden-variable theories on quantum circuits: flow, Schrodinger and
product-style theories, sampled histories and the history-based algorithms."""

from ._core import (
    Error,
    born_probabilities,
    check_indifference,
    check_robustness,
    graph_sampler,
    joint,
    lex_max_flow,
    max_flow,
    nogo_witness,
    run_cli,
    run_juggle,
    sample_histories,
    search,
    sinkhorn,
    statistical_difference,
    stochastic,
    theories,
    variation_distance,
)

__all__ = [
    "Error",
    "born_probabilities",
    "check_indifference",
    "check_robustness",
    "graph_sampler",
    "joint",
    "lex_max_flow",
    "max_flow",
    "nogo_witness",
    "run_cli",
    "run_juggle",
    "sample_histories",
    "search",
    "sinkhorn",
    "statistical_difference",
    "stochastic",
    "theories",
    "variation_distance",
]

__version__ = "0.1.0"
