import json

import numpy as np
import pytest
from hypothesis import given

from summarytree import TreeError, build_tree, canonicalize, read_csv, read_json
from tests.conftest import make_tree, tree_records


class TestBuildTree:
    def test_three_node_star(self):
        t = build_tree([("r", None, 1), ("a", "r", 1), ("b", "r", 1)])
        assert t.n == 3
        assert t.total_weight == 3.0

    def test_zero_total_weight_rejected(self):
        with pytest.raises(TreeError, match="total weight"):
            build_tree([("r", None, 0)])

    def test_cycle_rejected(self):
        with pytest.raises(TreeError, match="cycle|root"):
            build_tree([("a", "b", 1), ("b", "a", 1)])

    def test_cycle_with_root_rejected(self):
        with pytest.raises(TreeError, match="cycle"):
            build_tree([("r", None, 1), ("a", "b", 1), ("b", "a", 1)])

    def test_duplicate_id_rejected(self):
        with pytest.raises(TreeError, match="duplicate"):
            build_tree([("r", None, 1), ("r", "r", 1)])

    def test_unknown_parent_rejected(self):
        with pytest.raises(TreeError, match="unknown parent"):
            build_tree([("r", None, 1), ("a", "q", 1)])

    def test_multiple_roots_rejected(self):
        with pytest.raises(TreeError, match="multiple roots"):
            build_tree([("r", None, 1), ("s", None, 1)])

    def test_no_root_rejected(self):
        with pytest.raises(TreeError, match="no root"):
            build_tree([("a", "b", 1), ("b", "a", 1), ("c", "a", 1)])

    def test_negative_weight_rejected(self):
        with pytest.raises(TreeError, match="negative"):
            build_tree([("r", None, 1), ("a", "r", -2)])

    def test_empty_rejected(self):
        with pytest.raises(TreeError):
            build_tree([])


class TestCanonicalize:
    def test_star_child_order_by_size(self):
        t = make_tree([("r", None, 1), ("a", "r", 3), ("b", "r", 1), ("c", "r", 2)])
        assert t.W == 7.0
        kids = [t.ext(c) for c in t.children(1)]
        assert kids == ["b", "c", "a"]

    def test_path_sizes_and_counts(self):
        t = make_tree([("r", None, 1), ("x", "r", 1), ("y", "x", 1)])
        assert t.size[1] == 3 and t.size[2] == 2 and t.size[3] == 1
        assert t.count[1] == 3

    def test_size_ties_broken_by_id(self):
        t = make_tree([("r", None, 0), ("b", "r", 1), ("a", "r", 1), ("c", "r", 1)])
        assert [t.ext(c) for c in t.children(1)] == ["a", "b", "c"]

    def test_conservation(self):
        t = make_tree([("r", None, 2), ("a", "r", 0.5), ("b", "a", 1.25)])
        assert float(t.weight[1:].sum()) == pytest.approx(t.W, rel=1e-12)

    def test_idempotent(self):
        t = make_tree(
            [("r", None, 1), ("a", "r", 4), ("b", "r", 2), ("c", "a", 1), ("d", "a", 0)]
        )
        t2 = canonicalize(t)
        assert t2.ext_of_label == t.ext_of_label
        assert np.array_equal(t2.parent, t.parent)
        assert np.array_equal(t2.size, t.size)


def _independent_subtree_sums(records):
    """Recompute subtree weight sums with a plain dict walk."""
    children = {}
    weights = {}
    root = None
    for node_id, parent, w in records:
        weights[node_id] = w
        children.setdefault(node_id, [])
        if parent is None:
            root = node_id
        else:
            children.setdefault(parent, []).append(node_id)
    sums = {}
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            sums[node] = weights[node] + sum(sums[c] for c in children[node])
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in children[node])
    return sums


@given(tree_records())
def test_sizes_match_independent_traversal(recs):
    t = make_tree(recs)
    sums = _independent_subtree_sums(recs)
    for v in range(1, t.n + 1):
        assert float(t.size[v]) == pytest.approx(sums[t.ext(v)], rel=1e-9, abs=1e-9)


@given(tree_records())
def test_labeling_invariants(recs):
    t = make_tree(recs)
    n = t.n
    # bijection onto 1..n with the root at 1
    assert sorted(t.label_of_ext.values()) == list(range(1, n + 1))
    assert int(t.parent[1]) == 0
    for v in range(2, n + 1):
        assert 1 <= int(t.parent[v]) < v
    # children consecutive and sorted by size
    for v in range(1, n + 1):
        kids = list(t.children(v))
        if kids:
            assert kids == list(range(kids[0], kids[0] + len(kids)))
            sizes = [float(t.size[c]) for c in kids]
            assert sizes == sorted(sizes)
    # labels within a depth level are consecutive (depth nondecreasing by label)
    depths = [int(t.depth[v]) for v in range(1, n + 1)]
    assert depths == sorted(depths)
    # counts consistent
    for v in range(1, n + 1):
        assert int(t.count[v]) == 1 + sum(int(t.count[c]) for c in t.children(v))
    # preorder spans cover each subtree exactly
    got = sorted(int(x) for x in t.subtree_labels(1))
    assert got == list(range(1, n + 1))


@given(tree_records())
def test_scaled_copy_preserves_structure(recs):
    t = make_tree(recs)
    s = t.with_scaled_weights(4.0)
    assert np.array_equal(s.parent, t.parent)
    assert np.allclose(s.size, t.size * 4.0)
    assert s.W == pytest.approx(4.0 * t.W, rel=1e-12)


class TestFileFormats:
    def test_csv_roundtrip(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("id,parent,weight\nr,,1\nx,r,2.5\ny,r,0\n", encoding="utf-8")
        t = read_csv(p)
        assert t.n == 3 and t.total_weight == 3.5

    def test_csv_bad_header(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("node,up,w\nr,,1\n", encoding="utf-8")
        with pytest.raises(TreeError, match="header"):
            read_csv(p)

    def test_csv_bad_weight(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("id,parent,weight\nr,,abc\n", encoding="utf-8")
        with pytest.raises(TreeError, match="weight"):
            read_csv(p)

    def test_json_nested(self, tmp_path):
        doc = {
            "id": "r",
            "weight": 1,
            "children": [
                {"id": "a", "weight": 2, "children": []},
                {"id": "b", "weight": 3},
            ],
        }
        p = tmp_path / "t.json"
        p.write_text(json.dumps(doc), encoding="utf-8")
        t = read_json(p)
        assert t.n == 3 and t.total_weight == 6.0

    def test_json_missing_field(self, tmp_path):
        p = tmp_path / "t.json"
        p.write_text(json.dumps({"id": "r"}), encoding="utf-8")
        with pytest.raises(TreeError):
            read_json(p)

    def test_deep_json_chain(self, tmp_path):
        depth = 300
        text = "".join(
            '{"id": "n%d", "weight": 1.0, "children": [' % i for i in range(depth)
        )
        text += '{"id": "n%d", "weight": 1.0}' % depth + "]}" * depth
        p = tmp_path / "deep.json"
        p.write_text(text, encoding="utf-8")
        assert read_json(p).n == depth + 1
