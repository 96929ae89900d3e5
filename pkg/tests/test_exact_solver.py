import math

import numpy as np
import pytest
from hypothesis import given, settings

from summarytree import (
    brute_force_opt,
    canonicalize,
    node_pseudo_entropy,
    random_tree,
    reconstruct,
    solve_exact,
    sweep_near_prefix_class,
    sweep_prefix_class,
    validate_summary_tree,
)
from summarytree.entropy_core import _term
from tests.conftest import make_tree, path_tree, tree_records

H_1_3 = 0.8112781244591328


class TestSmallInstances:
    def test_p4_all_orders(self, p4):
        tb = solve_exact(p4, 4)
        assert tb.all_entropy_bits() == pytest.approx([0.0, H_1_3, 1.5, 2.0], abs=1e-12)

    def test_k1_is_zero_entropy(self):
        t = make_tree([("r", None, 3), ("a", "r", 0.7), ("b", "a", 9)])
        assert solve_exact(t, 1).entropy_bits(1) == 0.0

    def test_single_node_tree(self):
        t = make_tree([("r", None, 5)])
        tb = solve_exact(t, 10)
        assert tb.max_k == 1
        s = tb.reconstruct(1)
        assert s.nodes[0].kind == "singleton" and s.entropy_bits == 0.0

    def test_f_v1_equals_node_pseudo_entropy(self, gap7):
        tb = solve_exact(gap7, 4)
        for v in range(1, gap7.n + 1):
            assert tb.value(v, 1) == pytest.approx(
                node_pseudo_entropy(float(gap7.size[v]), gap7.W).value, abs=1e-12
            )

    def test_value_range_checked(self, p4):
        tb = solve_exact(p4, 2)
        with pytest.raises(ValueError):
            tb.value(1, 3)
        with pytest.raises(ValueError):
            tb.value(1, 0)
        with pytest.raises(ValueError):
            tb.entropy_bits(5)


class TestSweeps:
    def test_max_plus_on_singleton_tables(self):
        W = 4.0
        children = [([0.3], 1.0, 1), ([0.4], 1.0, 1)]
        G = sweep_prefix_class(children, W, 8)
        assert G[0] == pytest.approx(_term(2.0, W), abs=1e-15)  # group of both
        assert G[1] == pytest.approx(0.7, abs=1e-15)

    def test_max_plus_two_by_two(self):
        children = [([0.2, 0.5], 1.0, 2), ([0.3, 0.4], 1.0, 2)]
        G = sweep_prefix_class(children, 4.0, 8)
        assert G[2] == pytest.approx(0.8, abs=1e-15)  # max(0.2+0.4, 0.5+0.3)

    def test_forced_seed_contributes_weight(self):
        W = 8.0
        children = [([0.1], 2.0, 1)]
        G = sweep_prefix_class(children, W, 8, forced_weights=[1.0, 1.0])
        assert G[0] == pytest.approx(_term(4.0, W), abs=1e-15)
        assert G[1] == pytest.approx(_term(2.0, W) + 0.1, abs=1e-15)

    def test_near_prefix_seeds_child_j(self):
        W = 8.0
        children = [([0.1], 1.0, 1), ([0.2], 1.0, 1), ([0.3], 2.0, 1)]
        G = sweep_near_prefix_class(children, W, 8, j=3)
        # seed {child 3}; sweeping children 1 and 2
        assert G[0] == pytest.approx(_term(4.0, W), abs=1e-15)  # all absorbed
        assert G[2] == pytest.approx(_term(2.0, W) + 0.1 + 0.2, abs=1e-15)

    def test_near_prefix_j_out_of_range(self):
        with pytest.raises(ValueError):
            sweep_near_prefix_class([([0.1], 1.0, 1)], 4.0, 8, j=2)

    def test_p4_prefix_sweep_matches_oracle(self):
        # On paths the prefix class alone is exact for every k.
        for n in range(2, 7):
            t = path_tree([1.0] * n)
            tb = solve_exact(t, n)
            for k in range(1, n + 1):
                assert tb.entropy_bits(k) == pytest.approx(
                    brute_force_opt(t, k).best, abs=1e-9
                )


class TestOracleEquivalence:
    def test_random_small_trees(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n = int(rng.integers(1, 10))
            t = canonicalize(random_tree(n, weights="integer", max_weight=8, seed=rng))
            tb = solve_exact(t, n)
            for k in range(1, n + 1):
                r = brute_force_opt(t, k)
                assert tb.entropy_bits(k) == pytest.approx(r.best, abs=1e-9)
                assert r.best == pytest.approx(r.near_prefix_max, abs=1e-9)

    def test_small_K_with_forced_group_membership(self):
        """With d_v > K the smallest children are absorbed unprocessed;
        the values must still match the unrestricted k-node optimum."""
        from summarytree.tree_model import from_arrays

        rng = np.random.default_rng(2025)
        for trial in range(40):
            n = int(rng.integers(4, 11))
            parents = np.full(n, -1, dtype=np.int64)
            if trial % 2:
                parents[1:] = 0  # wide star
            else:
                for i in range(1, n):
                    parents[i] = rng.integers(0, max(1, min(i, 3)))
            w = rng.integers(0, 5, size=n).astype(float)
            if w.sum() <= 0:
                w[0] = 1
            t = canonicalize(from_arrays(parents, w))
            for K in (2, 3, 4):
                tb = solve_exact(t, K)
                for k in range(1, tb.max_k + 1):
                    r = brute_force_opt(t, k)
                    assert tb.entropy_bits(k) == pytest.approx(r.best, abs=1e-9)
                    validate_summary_tree(tb.reconstruct(k), t, strict_classes=True)


class TestReconstruct:
    def test_k1_single_node_holds_everything(self, gap7):
        s = solve_exact(gap7, 4).reconstruct(1)
        assert len(s.nodes) == 1
        assert len(s.nodes[0].members) == gap7.n

    def test_k_equals_n_unit_weights(self):
        t = path_tree([1.0] * 6)
        tb = solve_exact(t, 6)
        s = tb.reconstruct(6)
        assert all(nd.kind == "singleton" for nd in s.nodes)
        assert s.entropy_bits == pytest.approx(math.log2(6), abs=1e-12)

    def test_p4_k2_structure(self, p4):
        s = solve_exact(p4, 2).reconstruct(2)
        kinds = sorted((nd.kind, len(nd.members)) for nd in s.nodes)
        assert kinds == [("singleton", 1), ("subtree", 3)]
        assert s.entropy_bits == pytest.approx(H_1_3, rel=1e-12)

    def test_entropy_matches_table_and_validates(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(2, 40))
            t = canonicalize(random_tree(n, weights="uniform", seed=rng))
            tb = solve_exact(t, 8)
            for k in range(1, tb.max_k + 1):
                s = tb.reconstruct(k)
                assert s.entropy_bits == pytest.approx(tb.entropy_bits(k), abs=1e-9)
                validate_summary_tree(s, t, strict_classes=True)

    def test_module_level_reconstruct(self, p4):
        tb = solve_exact(p4, 3)
        assert reconstruct(tb, 3).k == 3

    def test_k_out_of_range(self, p4):
        tb = solve_exact(p4, 2)
        with pytest.raises(ValueError):
            tb.reconstruct(3)


class TestProperties:
    @given(tree_records(max_n=16))
    @settings(max_examples=25)
    def test_monotone_and_bounded(self, recs):
        t = make_tree(recs)
        tb = solve_exact(t, 8)
        prev = -1.0
        for k in range(1, tb.max_k + 1):
            e = tb.entropy_bits(k)
            assert e >= prev - 1e-9
            assert e <= math.log2(k) + 1e-9
            prev = e

    def test_scale_invariance_power_of_two(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(2, 30))
            t = canonicalize(random_tree(n, weights="uniform", seed=rng))
            t4 = t.with_scaled_weights(4.0)
            a = solve_exact(t, 6)
            b = solve_exact(t4, 6)
            assert a.all_entropy_bits() == b.all_entropy_bits()
            for k in range(1, a.max_k + 1):
                sa = a.reconstruct(k)
                sb = b.reconstruct(k)
                assert [nd.members for nd in sa.nodes] == [nd.members for nd in sb.nodes]

    def test_scale_invariance_large_factor(self):
        rng = np.random.default_rng(6)
        t = canonicalize(random_tree(200, weights="uniform", seed=rng))
        a = solve_exact(t, 16).all_entropy_bits()
        b = solve_exact(t.with_scaled_weights(1e6), 16).all_entropy_bits()
        assert a == pytest.approx(b, abs=1e-9)

    def test_pair_cost_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = int(rng.integers(2, 500))
            K = int(rng.integers(1, 40))
            t = canonicalize(random_tree(n, weights="uniform", seed=rng))
            tb = solve_exact(t, K)
            assert tb.pair_cost <= 2 * K * n

    def test_zero_weight_nodes_allowed(self):
        t = make_tree([("r", None, 0), ("a", "r", 0), ("b", "r", 2), ("c", "b", 2)])
        tb = solve_exact(t, 4)
        assert tb.entropy_bits(1) == 0.0
        s = tb.reconstruct(tb.max_k)
        validate_summary_tree(s, t, strict_classes=True)

    def test_per_node_tables_monotone(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = int(rng.integers(2, 50))
            t = canonicalize(random_tree(n, weights="uniform", seed=rng))
            tb = solve_exact(t, 6)
            for v in range(1, n + 1):
                cap = min(6, int(t.count[v]))
                vals = [tb.value(v, k) for k in range(1, cap + 1)]
                for a, b in zip(vals, vals[1:]):
                    assert b >= a - 1e-9

    def test_concurrent_solves_match_serial(self):
        from concurrent.futures import ThreadPoolExecutor

        rng = np.random.default_rng(10)
        trees = [
            canonicalize(random_tree(int(rng.integers(2, 80)), seed=rng))
            for _ in range(12)
        ]
        serial = [solve_exact(t, 8).all_entropy_bits() for t in trees]
        with ThreadPoolExecutor(max_workers=4) as pool:
            parallel = list(pool.map(lambda t: solve_exact(t, 8).all_entropy_bits(), trees))
        assert serial == parallel
