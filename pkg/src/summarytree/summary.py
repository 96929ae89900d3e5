"""The summary-tree output type and its structural validators.

A k-node summary tree partitions the nodes of the input tree into k
member sets arranged as a tree.  Every summary node is one of

* ``singleton``: a single input node ``{v}``;
* ``subtree``: a whole input subtree collapsed to one node;
* ``group``: several sibling subtrees (a nonempty subset of some node's
  children together with all their descendants) collapsed to one
  "other" node.

Each summary node has at most one group child, and the parent of every
non-root summary node is a singleton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .entropy_core import _terms
from .tree_model import CanonicalTree

__all__ = ["SummaryNode", "SummaryTree", "InvariantError", "validate_summary_tree"]


class InvariantError(RuntimeError):
    """An internal structural check failed; results cannot be trusted."""


@dataclass
class SummaryNode:
    """One node of a summary tree.

    ``anchor`` is the represented input node for singleton/subtree kinds;
    for groups it is the input node whose children were grouped, with the
    grouped child labels in ``child_roots``.
    """

    kind: str
    anchor: int
    parent: int
    weight: float
    members: tuple[str, ...] = ()
    child_roots: tuple[int, ...] = ()


@dataclass
class SummaryTree:
    """A k-node summary tree together with its entropy in bits."""

    k: int
    entropy_bits: float
    total_weight: float
    nodes: list[SummaryNode] = field(default_factory=list)

    def node_weights(self) -> list[float]:
        return [nd.weight for nd in self.nodes]

    def root_group_roots(self) -> tuple[int, ...]:
        """Grouped child labels of the root's group node, if any (else ())."""
        for nd in self.nodes:
            if nd.kind == "group" and nd.parent >= 0 and self.nodes[nd.parent].parent < 0:
                return nd.child_roots
        return ()


def recompute_entropy_bits(tree: SummaryTree) -> float:
    """Entropy of the summary tree recomputed from its node weights."""
    return float(_terms(np.array(tree.node_weights()), tree.total_weight).sum())


def _child_position(ct: CanonicalTree, v: int, child: int) -> int:
    """1-based position of ``child`` within v's size-sorted children."""
    return child - int(ct.first_child[v]) + 1


def validate_summary_tree(
    tree: SummaryTree,
    ct: CanonicalTree,
    strict_classes: bool = False,
    rel_tol: float = 1e-9,
) -> None:
    """Check every structural invariant of a summary tree of ``ct``.

    Checks: node count, member sets partition the input nodes, weights,
    single root anchored at the tree root, parent links consistent with
    the input tree, at most one group child per node, group child sets
    drawn from one parent's children, and the recomputed entropy.  With
    ``strict_classes`` every group's child set must additionally be a
    prefix or a near-prefix of the parent's size-sorted children.

    Raises:
        InvariantError: on the first violated invariant.
    """

    def fail(msg: str):
        raise InvariantError(msg)

    nodes = tree.nodes
    if len(nodes) != tree.k:
        fail(f"node count {len(nodes)} != k {tree.k}")

    roots = [i for i, nd in enumerate(nodes) if nd.parent < 0]
    if len(roots) != 1:
        fail(f"expected exactly one root node, found {len(roots)}")

    # Member sets partition 1..n.
    covered = []
    for nd in nodes:
        labels = _member_labels(nd, ct)
        if labels.size == 0:
            fail("empty member set")
        covered.append(labels)
        w = float(ct.weight[labels].sum())
        if abs(w - nd.weight) > rel_tol * max(1.0, abs(w)):
            fail(f"node weight {nd.weight} != member sum {w}")
    allcov = np.sort(np.concatenate(covered))
    if allcov.size != ct.n or not np.array_equal(allcov, np.arange(1, ct.n + 1)):
        fail("member sets do not partition the input nodes")

    if 1 not in set(int(x) for x in _member_labels(nodes[roots[0]], ct)):
        fail("root summary node does not contain the tree root")

    total = sum(nd.weight for nd in nodes)
    if abs(total - tree.total_weight) > rel_tol * tree.total_weight:
        fail(f"node weights sum to {total}, expected {tree.total_weight}")

    group_children: dict[int, int] = {}
    for i, nd in enumerate(nodes):
        if nd.parent >= 0:
            parent = nodes[nd.parent]
            if parent.kind != "singleton":
                fail("parent of a summary node is not a singleton")
            p = parent.anchor
            if nd.kind == "group":
                if nd.anchor != p:
                    fail("group node anchored at a different parent")
                if not nd.child_roots:
                    fail("group node with no grouped children")
                for c in nd.child_roots:
                    if int(ct.parent[c]) != p:
                        fail("grouped subtree is not a child of the parent node")
                group_children[nd.parent] = group_children.get(nd.parent, 0) + 1
                if group_children[nd.parent] > 1:
                    fail("node has more than one group child")
                if strict_classes:
                    pos = sorted(_child_position(ct, p, c) for c in nd.child_roots)
                    m = len(pos)
                    is_prefix = pos == list(range(1, m + 1))
                    is_near = (
                        pos[:-1] == list(range(1, m)) and pos[-1] >= m + 1
                    )
                    if not (is_prefix or is_near):
                        fail(f"group child positions {pos} are neither prefix nor near-prefix")
            else:
                if int(ct.parent[nd.anchor]) != p:
                    fail("summary node is not attached under its input parent")

    recomputed = recompute_entropy_bits(tree)
    if abs(recomputed - tree.entropy_bits) > rel_tol * max(1.0, abs(recomputed)):
        fail(f"entropy {tree.entropy_bits} != recomputed {recomputed}")


def _member_labels(nd: SummaryNode, ct: CanonicalTree) -> np.ndarray:
    if nd.kind == "singleton":
        return np.array([nd.anchor], dtype=np.int64)
    if nd.kind == "subtree":
        return ct.subtree_labels(nd.anchor)
    parts = [ct.subtree_labels(c) for c in nd.child_roots]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def member_ids(nd: SummaryNode, ct: CanonicalTree) -> tuple[str, ...]:
    """Sorted external ids represented by a summary node."""
    return tuple(sorted(ct.ext(int(v)) for v in _member_labels(nd, ct)))


def attach_members(tree: SummaryTree, ct: CanonicalTree) -> SummaryTree:
    """Fill in the ``members`` tuples of every node (in place) and return the tree."""
    for nd in tree.nodes:
        nd.members = member_ids(nd, ct)
    return tree
