"""Shared fixtures and strategies for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from summarytree import CanonicalTree, build_tree, canonicalize

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_tree(records) -> CanonicalTree:
    return canonicalize(build_tree(records))


def path_tree(weights) -> CanonicalTree:
    """A descending path with the given weights, root first."""
    recs = []
    for i, w in enumerate(weights):
        recs.append((f"p{i}", None if i == 0 else f"p{i-1}", w))
    return make_tree(recs)


def star_tree(root_weight, leaf_weights) -> CanonicalTree:
    recs = [("r", None, root_weight)]
    recs += [(f"l{i}", "r", w) for i, w in enumerate(leaf_weights)]
    return make_tree(recs)


@pytest.fixture
def p4() -> CanonicalTree:
    """Unit-weight path of four nodes; best 2-node split is (1, 3)."""
    return path_tree([1, 1, 1, 1])


@pytest.fixture
def gap7() -> CanonicalTree:
    """7-node instance where only a near-prefix group is optimal at k=4.

    Root children sorted by size: v1 (0) < v2-subtree (4) < v3-subtree
    (4.0625, driven by v6 slightly above 2).  The unique 4-node optimum
    groups {v1, v3} for entropy close to 1.5 bits, while the best
    prefix-only tree reaches only about 1 bit with group {v1, v2}.
    """
    return make_tree(
        [
            ("v0", None, 0),
            ("v1", "v0", 0),
            ("v2", "v0", 2),
            ("v3", "v0", 0),
            ("v4", "v2", 2),
            ("v5", "v3", 2),
            ("v6", "v3", 2.0625),
        ]
    )


@st.composite
def tree_records(draw, max_n: int = 20, integer_weights: bool = False):
    """Random (id, parent, weight) records forming a valid rooted tree."""
    n = draw(st.integers(min_value=1, max_value=max_n))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    if integer_weights:
        ws = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    else:
        ws = draw(
            st.lists(
                st.floats(0, 64, allow_nan=False, allow_infinity=False),
                min_size=n,
                max_size=n,
            )
        )
    if sum(ws) <= 0:
        ws = list(ws)
        ws[draw(st.integers(0, n - 1))] = 1
    recs = [
        (f"n{i:03d}", None if i == 0 else f"n{parents[i - 1]:03d}", float(ws[i]))
        for i in range(n)
    ]
    return recs


def random_canonical(rng: np.random.Generator, n: int, weights: str = "uniform") -> CanonicalTree:
    from summarytree import random_tree

    return canonicalize(random_tree(n, weights=weights, seed=rng))
