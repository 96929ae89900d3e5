"""Additive-approximation solver: rescale, round, reduce, then solve exactly.

To handle real weights at a cost independent of the weight magnitudes,
the tree is rescaled to a small integer total W0, every weight is
rounded to an adjacent integer so that no subtree's total moves by more
than 1, and the exact dynamic program runs on a reduced tree in which
all zero-rounded-weight structure is collapsed.  Entropies of the
returned trees, measured with the original weights, are within an
additive epsilon of the true optimum once W0 is of order
(K/epsilon) * lg(K/epsilon).

The reduced tree keeps at most W0 positive-weight nodes.  Zero-weight
subtrees hanging off a positively-sized node are replaced by a single
zero-weight placeholder child that remembers the removed ids, and long
descending chains of zero-weight nodes are recorded so the solver can
shift tables across them in O(K) instead of sweeping every chain node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .entropy_core import _terms
from .exact_solver import DPTables, _Chain, _Engine, _RawNode
from .summary import InvariantError, SummaryNode, SummaryTree, attach_members
from .tree_model import CanonicalTree

__all__ = [
    "compute_W0",
    "rescale",
    "discrepancy_round",
    "reduce_tree",
    "solve_approx",
    "RoundedTree",
    "ReducedTree",
    "ApproxResult",
]


def compute_W0(K: int, epsilon: float, c: float = 2.0) -> int:
    """Integer rescaling target W0 = max(2K, ceil((cK/eps) * lg(2 + cK/eps))).

    The lower clamp at 2K keeps the rounded tree from starving the DP of
    mass at tiny K.  ``c`` trades run time against approximation slack;
    the default is calibrated so the additive-epsilon guarantee holds in
    the acceptance suite.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if c <= 0.0:
        raise ValueError("c must be positive")
    x = c * K / epsilon
    return max(2 * K, math.ceil(x * math.log2(2.0 + x)))


def rescale(t: CanonicalTree, W0: int) -> CanonicalTree:
    """Multiply all weights by W0/W so they sum to exactly W0.

    Pure rescaling leaves the entropy of every summary tree unchanged
    and preserves the canonical child order and labeling.
    """
    return t.with_scaled_weights(float(W0) / t.W)


@dataclass
class RoundedTree:
    """Integer-rounded weights of a rescaled tree, plus both originals.

    Guarantees (checked by :meth:`check`): every rounded weight is the
    floor or the ceiling of its rescaled value, every subtree total moves
    by at most 1, and the grand total is exactly W0.
    """

    base: CanonicalTree
    scaled: CanonicalTree
    w_rounded: np.ndarray
    s_rounded: np.ndarray
    W0: int

    def check(self, tol: float = 1e-9) -> None:
        w = self.scaled.weight[1:]
        wr = self.w_rounded[1:]
        lo = np.floor(w)
        if not ((wr == lo) | (wr == lo + 1)).all():
            raise InvariantError("a rounded weight is not floor or floor+1")
        if int(self.w_rounded.sum()) != self.W0:
            raise InvariantError("rounded total differs from W0")
        disc = np.abs(self.s_rounded[1:] - self.scaled.size[1:])
        if float(disc.max(initial=0.0)) > 1.0 + tol:
            raise InvariantError("a subtree discrepancy exceeds 1")


def discrepancy_round(scaled: CanonicalTree) -> RoundedTree:
    """Round weights to integers with every subtree total moving by <= 1.

    Nodes are visited in depth-first order, in which every subtree is a
    contiguous interval; rounding the running prefix sums half-up and
    differencing keeps each prefix within 0.5 of its true value, hence
    each interval (subtree) within 1, preserves the total exactly, and
    moves every single weight to an adjacent integer.
    """
    n = scaled.n
    pre = scaled.preorder
    csum = np.cumsum(scaled.weight[pre])
    rounded_csum = np.floor(csum + 0.5)
    w_pre = np.diff(np.concatenate(([0.0], rounded_csum)))
    w_rounded = np.zeros(n + 1, dtype=np.int64)
    w_rounded[pre] = w_pre.astype(np.int64)

    # Subtree sums read straight off the rounded prefix sums.
    pos = scaled.pre_pos[1:]
    ends = pos + scaled.count[1:] - 1
    s_rounded = np.zeros(n + 1, dtype=np.int64)
    left = np.where(pos > 0, rounded_csum[pos - 1], 0.0)
    s_rounded[1:] = (rounded_csum[ends] - left).astype(np.int64)
    return RoundedTree(scaled, scaled, w_rounded, s_rounded, int(round(float(rounded_csum[-1]))))


@dataclass
class ReducedTree:
    """The zero-collapsed reduced tree and its bookkeeping.

    ``tree`` is a canonical tree over fresh labels whose children are
    ordered by rounded size.  ``orig_label`` maps reduced labels back to
    input labels (0 for placeholders); ``placeholder_roots`` maps each
    placeholder to the removed input children it stands for; ``chains``
    records maximal compressible zero-weight chains.
    """

    tree: CanonicalTree
    base: CanonicalTree
    rounded: RoundedTree
    orig_label: np.ndarray
    tprime_label: np.ndarray
    placeholder_roots: dict[int, np.ndarray]
    chains: dict[int, _Chain]
    chain_skip: frozenset[int]

    @property
    def positive_weight_nodes(self) -> int:
        return int((self.tree.weight[1:] > 0).sum())

    @property
    def zero_branching_nodes(self) -> int:
        """Zero-weight reduced nodes with two or more positively sized children."""
        t = self.tree
        out = 0
        for v in range(1, t.n + 1):
            if t.weight[v] == 0 and t.degree[v] > 0:
                fc = int(t.first_child[v])
                d = int(t.degree[v])
                if int((t.size[fc : fc + d] > 0).sum()) >= 2:
                    out += 1
        return out

    @property
    def path_records(self) -> list[tuple[int, int, int, int]]:
        return [(c.top, c.bottom, c.l, c.lprime) for c in self.chains.values()]


def _counting_argsort(keys: np.ndarray, kmax: int) -> np.ndarray:
    """Stable counting sort permutation for small nonnegative integer keys."""
    cnt = np.bincount(keys, minlength=kmax + 1)
    off = np.cumsum(cnt) - cnt
    out = np.empty(keys.shape[0], dtype=np.int64)
    for i, key in enumerate(keys):
        out[off[key]] = i
        off[key] += 1
    return out


def reduce_tree(rt: RoundedTree) -> ReducedTree:
    """Collapse zero-rounded-size structure and record zero-weight chains.

    For every positively sized node, its zero-sized children (and all
    their descendants) are replaced by one zero-weight placeholder child.
    Children are re-sorted by rounded size with a two-pass counting sort
    on (size, parent) and relabeled breadth-first.
    """
    base = rt.base
    s = rt.s_rounded
    w = rt.w_rounded
    if s[1] <= 0:
        raise ValueError("all rounded weights are zero")

    kept = np.flatnonzero(s[1:] > 0) + 1
    n_kept = kept.shape[0]
    tmp_of_orig = np.zeros(base.n + 1, dtype=np.int64)
    tmp_of_orig[kept] = np.arange(n_kept)

    ph_roots: list[np.ndarray] = []
    ch_par: list[int] = []
    ch_size: list[int] = []
    ch_node: list[int] = []
    for i in range(n_kept):
        v = int(kept[i])
        d = int(base.degree[v])
        if d == 0:
            continue
        fc = int(base.first_child[v])
        kids = np.arange(fc, fc + d)
        ks = s[kids]
        for c in kids[ks > 0]:
            ch_par.append(i)
            ch_size.append(int(s[c]))
            ch_node.append(int(tmp_of_orig[c]))
        zeros = kids[ks == 0]
        if zeros.shape[0]:
            ch_par.append(i)
            ch_size.append(0)
            ch_node.append(n_kept + len(ph_roots))
            ph_roots.append(zeros.astype(np.int64))

    n_prime = n_kept + len(ph_roots)
    par_arr = np.array(ch_par, dtype=np.int64)
    size_arr = np.array(ch_size, dtype=np.int64)
    node_arr = np.array(ch_node, dtype=np.int64)
    if par_arr.shape[0]:
        o1 = _counting_argsort(size_arr, rt.W0)
        par_arr, size_arr, node_arr = par_arr[o1], size_arr[o1], node_arr[o1]
        o2 = _counting_argsort(par_arr, n_kept)
        par_arr, size_arr, node_arr = par_arr[o2], size_arr[o2], node_arr[o2]

    counts = np.bincount(par_arr, minlength=n_kept) if par_arr.shape[0] else np.zeros(n_kept, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))

    # Breadth-first relabeling over the sorted child groups.
    bfs = np.empty(n_prime, dtype=np.int64)
    bfs[0] = 0  # tmp index of the original root
    filled = 1
    i = 0
    while i < filled:
        v = int(bfs[i])
        if v < n_kept and counts[v]:
            grp = node_arr[offsets[v] : offsets[v] + counts[v]]
            bfs[filled : filled + grp.shape[0]] = grp
            filled += grp.shape[0]
        i += 1

    label_of_tmp = np.empty(n_prime, dtype=np.int64)
    label_of_tmp[bfs] = np.arange(1, n_prime + 1)

    weight_p = np.zeros(n_prime + 1)
    size_p = np.zeros(n_prime + 1)
    degree_p = np.zeros(n_prime + 1, dtype=np.int64)
    parent_p = np.zeros(n_prime + 1, dtype=np.int64)
    orig_label = np.zeros(n_prime + 1, dtype=np.int64)
    ext: list = [None] * (n_prime + 1)
    for lab in range(1, n_prime + 1):
        tmp = int(bfs[lab - 1])
        if tmp < n_kept:
            ov = int(kept[tmp])
            orig_label[lab] = ov
            weight_p[lab] = float(w[ov])
            size_p[lab] = float(s[ov])
            degree_p[lab] = counts[tmp]
            ext[lab] = base.ext(ov)
        else:
            ext[lab] = f"~other~{lab}"
    for idx in range(par_arr.shape[0]):
        parent_p[label_of_tmp[node_arr[idx]]] = label_of_tmp[par_arr[idx]]

    first_child = np.zeros(n_prime + 1, dtype=np.int64)
    starts = 2 + np.concatenate(([0], np.cumsum(degree_p[1:-1])))
    first_child[1:] = np.where(degree_p[1:] > 0, starts, 0)

    count_p = np.ones(n_prime + 1, dtype=np.int64)
    count_p[0] = 0
    for lab in range(n_prime, 1, -1):
        count_p[parent_p[lab]] += count_p[lab]

    depth_p = np.zeros(n_prime + 1, dtype=np.int64)
    for lab in range(2, n_prime + 1):
        depth_p[lab] = depth_p[parent_p[lab]] + 1

    tree = CanonicalTree(weight_p, size_p, count_p, degree_p, parent_p, first_child, depth_p, ext)

    tprime_label = np.zeros(base.n + 1, dtype=np.int64)
    tprime_label[kept] = label_of_tmp[np.arange(n_kept)]
    placeholder_roots = {
        int(label_of_tmp[n_kept + j]): ph_roots[j] for j in range(len(ph_roots))
    }

    chains, chain_skip = _find_chains(tree)
    return ReducedTree(
        tree, base, rt, orig_label, tprime_label, placeholder_roots, chains, chain_skip
    )


def _find_chains(t: CanonicalTree) -> tuple[dict[int, _Chain], frozenset]:
    """Locate maximal descending chains of zero-weight pass-through nodes."""
    n = t.n
    deg = t.degree
    w = t.weight
    is_zero_leaf = np.zeros(n + 1, dtype=bool)
    is_zero_leaf[1:] = (deg[1:] == 0) & (w[1:] == 0)
    continuation = np.zeros(n + 1, dtype=np.int64)
    zleaf = np.zeros(n + 1, dtype=np.int64)
    candidate = np.zeros(n + 1, dtype=bool)
    for v in range(1, n + 1):
        if w[v] != 0 or deg[v] == 0:
            continue
        fc = int(t.first_child[v])
        if deg[v] == 1:
            candidate[v] = True
            continuation[v] = fc
        elif deg[v] == 2:
            z1 = bool(is_zero_leaf[fc])
            z2 = bool(is_zero_leaf[fc + 1])
            if z1 != z2:
                candidate[v] = True
                zleaf[v] = fc if z1 else fc + 1
                continuation[v] = fc + 1 if z1 else fc
    chains: dict[int, _Chain] = {}
    skip = set()
    for v in range(1, n + 1):
        if not candidate[v]:
            continue
        p = int(t.parent[v])
        if p and candidate[p] and continuation[p] == v:
            continue  # interior of a longer chain
        seq = []
        cur = v
        while candidate[cur]:
            seq.append((cur, int(zleaf[cur])))
            cur = int(continuation[cur])
        lprime = sum(1 for _, z in seq if z)
        chains[v] = _Chain(v, cur, len(seq), lprime, tuple(seq))
        for node, _ in seq[1:]:
            skip.add(node)
    return chains, frozenset(skip)


@dataclass
class ApproxResult:
    """Summary trees for every k <= min(K, n) with entropies in bits.

    ``entropy_bits`` is measured with the original weights (the quantity
    the additive guarantee is stated for); ``entropy_bits_rounded`` is
    the same trees scored with the rounded weights, kept for diagnostics.
    """

    K: int
    epsilon: float
    c: float
    W0: int
    rounded: RoundedTree
    reduced: ReducedTree
    tables: DPTables
    trees: list[SummaryTree]
    entropy_bits: list[float]
    entropy_bits_rounded: list[float]

    @property
    def max_k(self) -> int:
        return len(self.trees)

    @property
    def pair_cost(self) -> int:
        return self.tables.pair_cost


def _map_to_original(raw: list[_RawNode], red: ReducedTree):
    """Translate reduced-tree summary nodes back to the input tree."""
    base = red.base
    tp = red.tree
    ol = red.orig_label
    nodes: list[SummaryNode] = []
    rweights: list[int] = []
    for r in raw:
        if r.kind == "singleton":
            ov = int(ol[r.anchor])
            if ov:
                nodes.append(
                    SummaryNode("singleton", ov, r.parent, float(base.weight[ov]))
                )
                rweights.append(int(tp.weight[r.anchor]))
                continue
            roots = red.placeholder_roots[r.anchor]
            parent_orig = int(ol[tp.parent[r.anchor]])
            nodes.append(_group_or_subtree(base, parent_orig, list(roots), r.parent))
            rweights.append(0)
        elif r.kind == "subtree":
            ov = int(ol[r.anchor])
            nodes.append(SummaryNode("subtree", ov, r.parent, float(base.size[ov])))
            rweights.append(int(tp.size[r.anchor]))
        else:
            roots: list[int] = []
            rw = 0
            for c in r.child_roots:
                rw += int(tp.size[c])
                oc = int(ol[c])
                if oc:
                    roots.append(oc)
                else:
                    roots.extend(int(x) for x in red.placeholder_roots[c])
            nodes.append(_group_or_subtree(base, int(ol[r.anchor]), roots, r.parent))
            rweights.append(rw)
    return nodes, rweights


def _group_or_subtree(
    base: CanonicalTree, parent_orig: int, roots: list[int], parent_idx: int
) -> SummaryNode:
    if len(roots) == 1:
        c = roots[0]
        kind = "subtree" if int(base.count[c]) > 1 else "singleton"
        return SummaryNode(kind, c, parent_idx, float(base.size[c]))
    weight = float(sum(base.size[c] for c in roots))
    return SummaryNode("group", parent_orig, parent_idx, weight, (), tuple(sorted(roots)))


def _pad_to_k(nodes: list[SummaryNode], rweights: list[int], k: int, red: ReducedTree) -> None:
    """Split zero-rounded-weight pieces off until the tree has k nodes.

    Only splits whose separated piece carries zero rounded weight are
    taken, so the rounded entropy (and with it the optimality of the
    tree under the rounded weights) is preserved.
    """
    base = red.base
    s_r = red.rounded.s_rounded
    w_r = red.rounded.w_rounded
    while len(nodes) < k:
        done = False
        for i, nd in enumerate(nodes):
            if nd.kind == "group":
                zero_roots = [c for c in nd.child_roots if s_r[c] == 0]
                if not zero_roots:
                    continue
                c = zero_roots[0]
                rest = tuple(x for x in nd.child_roots if x != c)
                piece = _group_or_subtree(base, nd.anchor, [c], nd.parent)
                if len(rest) == 1:
                    nodes[i] = _group_or_subtree(base, nd.anchor, [rest[0]], nd.parent)
                    rweights[i] = int(s_r[rest[0]])
                else:
                    nd.child_roots = rest
                    nd.weight -= float(base.size[c])
                    rweights[i] -= int(s_r[c])
                nodes.append(piece)
                rweights.append(int(s_r[c]))
                done = True
                break
            if nd.kind == "subtree":
                y = nd.anchor
                if int(base.count[y]) < 2:
                    continue
                tail = int(s_r[y]) - int(w_r[y])
                if int(w_r[y]) != 0 and tail != 0:
                    continue
                kids = list(base.children(y))
                nodes[i] = SummaryNode("singleton", y, nd.parent, float(base.weight[y]))
                rweights[i] = int(w_r[y])
                child = _group_or_subtree(base, y, kids, i)
                nodes.append(child)
                rweights.append(tail)
                done = True
                break
        if not done:
            raise InvariantError(f"cannot pad summary tree to {k} nodes")


def solve_approx(
    t: CanonicalTree, K: int, epsilon: float, c: float = 2.0
) -> ApproxResult:
    """Summary trees within an additive ``epsilon`` of maximum entropy.

    Pipeline: rescale to W0 = compute_W0(K, epsilon, c), discrepancy-round,
    reduce the zero-weight structure, run the exact DP on the reduced tree
    (with O(K) shortcuts across recorded zero-weight chains), and map the
    reconstructed trees back to the original ids and weights.  Runs in
    O(n + W0 * K^3) time.
    """
    W0 = compute_W0(K, epsilon, c)
    scaled = rescale(t, W0)
    rounded = discrepancy_round(scaled)
    rounded = RoundedTree(t, scaled, rounded.w_rounded, rounded.s_rounded, rounded.W0)
    reduced = reduce_tree(rounded)
    engine = _Engine(
        reduced.tree, K, mode="exact", chains=reduced.chains, chain_skip=reduced.chain_skip
    )
    tables = DPTables(engine)
    max_k = min(K, t.n)
    W = t.W
    W0f = float(W0)
    trees: list[SummaryTree] = []
    ents: list[float] = []
    ents_rounded: list[float] = []
    for k in range(1, max_k + 1):
        kq = min(k, tables.max_k)
        raw = engine.rebuild(kq)
        nodes, rweights = _map_to_original(raw, reduced)
        _pad_to_k(nodes, rweights, k, reduced)
        ent = float(_terms(np.array([nd.weight for nd in nodes]), W).sum())
        ent_r = float(_terms(np.array(rweights, dtype=np.float64), W0f).sum())
        tree = SummaryTree(k, ent, W, nodes)
        attach_members(tree, t)
        trees.append(tree)
        ents.append(ent)
        ents_rounded.append(ent_r)
    return ApproxResult(
        K, epsilon, c, W0, rounded, reduced, tables, trees, ents, ents_rounded
    )
