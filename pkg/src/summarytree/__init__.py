"""Maximum-entropy k-node summary trees of node-weighted rooted trees.

A summary tree contracts an n-node weighted rooted tree to k nodes,
each a single node, a whole collapsed subtree, or a group of sibling
subtrees; the best summary is taken to be the one whose node-weight
distribution has maximum Shannon entropy.  This package provides an
exact O(K^2 n + n log n) solver for all orders k <= K, a faster greedy
restricted to prefix groups, an additive-epsilon approximation whose
cost is independent of the weight magnitudes, a brute-force oracle for
small trees, and a CLI.
"""

from .approx_solver import (
    ApproxResult,
    ReducedTree,
    RoundedTree,
    compute_W0,
    discrepancy_round,
    reduce_tree,
    rescale,
    solve_approx,
)
from .entropy_core import (
    EntropyBits,
    PseudoEntropy,
    entropy,
    node_pseudo_entropy,
    pseudo_to_entropy,
)
from .exact_solver import (
    CostCounter,
    DPTables,
    reconstruct,
    solve_exact,
    sweep_near_prefix_class,
    sweep_prefix_class,
)
from .generate import random_tree
from .greedy_solver import solve_greedy
from .oracle import BruteForceResult, brute_force_opt, count_summary_trees, enumerate_all
from .summary import InvariantError, SummaryNode, SummaryTree, validate_summary_tree
from .tree_model import (
    CanonicalTree,
    InputTree,
    TreeError,
    build_tree,
    canonicalize,
    from_arrays,
    read_csv,
    read_json,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "BruteForceResult",
    "CanonicalTree",
    "CostCounter",
    "DPTables",
    "EntropyBits",
    "InputTree",
    "InvariantError",
    "PseudoEntropy",
    "ReducedTree",
    "RoundedTree",
    "SummaryNode",
    "SummaryTree",
    "TreeError",
    "brute_force_opt",
    "build_tree",
    "canonicalize",
    "compute_W0",
    "count_summary_trees",
    "discrepancy_round",
    "entropy",
    "enumerate_all",
    "from_arrays",
    "node_pseudo_entropy",
    "pseudo_to_entropy",
    "random_tree",
    "read_csv",
    "read_json",
    "reconstruct",
    "reduce_tree",
    "rescale",
    "solve_approx",
    "solve_exact",
    "solve_greedy",
    "sweep_near_prefix_class",
    "sweep_prefix_class",
    "validate_summary_tree",
]
