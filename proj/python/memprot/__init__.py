"""Two-tier memory protection model.

Per-replica configurable chipkill strength composed with cross-node
replication or erasure coding: analytical reliability, a cost optimizer, an
exact enumeration oracle, a Monte Carlo checker, and a deterministic
rack-scale simulator.
"""

from ._core import (
    __version__,
    bch_codeword_length,
    cache_line_due,
    cache_line_due_log10,
    compare_schemes,
    enumerate_exact,
    evaluate,
    mce_cost_model,
    minimize_t,
    physical_block_due,
    protocol_values,
    run_racksim,
    simulate,
)

__all__ = [
    "__version__",
    "bch_codeword_length",
    "cache_line_due",
    "cache_line_due_log10",
    "compare_schemes",
    "enumerate_exact",
    "evaluate",
    "mce_cost_model",
    "minimize_t",
    "physical_block_due",
    "protocol_values",
    "run_racksim",
    "simulate",
]
