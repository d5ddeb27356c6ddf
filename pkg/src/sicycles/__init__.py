"""Subjectively interesting cycles and Steiner cycles in weighted digraphs."""

from .background import (
    Block,
    DomainError,
    InfeasiblePrior,
    MaxEntModel,
    NonConvergence,
    PriorSpec,
    edge_survival,
    fit_maxent,
    surprisal_graph,
)
from .graph import (
    Cycle,
    DiGraph,
    DuplicateEdgeError,
    GraphFormatError,
    NegativeWeightError,
    bfs_hops,
    load_edge_list,
    save_edge_list,
    validate_cycle,
)
from .interestingness import ICDLParams, InvalidCycleError, dl, ic, interestingness, params_from_q
from .kernels import BACKEND
from .mmc import build_karp_table, karp_mmc, karp_variant
from .oracle import (
    BudgetExceeded,
    EnumerationBudget,
    cycle_profile,
    enumerate_cycles,
    exact_kmsic,
    exact_msic,
    gen_erdos,
    gen_r2vdp_gadget,
)
from .steiner import SteinerQuery, best_change, enumerate_changes, local_search, prune

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
