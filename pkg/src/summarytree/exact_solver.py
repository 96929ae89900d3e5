"""Exact maximum-entropy k-node summary trees for every k <= K.

The solver runs one bottom-up dynamic program over the canonical tree.
For each node v it computes F(v, k), the best pseudo-entropy of a k-node
summary tree of v's subtree, for 1 <= k <= min(K, n_v).  A k-node tree
is the singleton {v} on top of a (k-1)-node summary forest over v's
child subtrees, so the work at v is building optimal forest tables.

Although the group ("other") node of a summary tree may in principle
absorb an arbitrary nonempty subset of v's children, restricting
candidates to prefixes and near-prefixes of the size-sorted child order
loses no entropy; the brute-force oracle cross-checks that claim on
small instances.  The solver therefore evaluates one forest table per
candidate class:

* the prefix class, whose group absorbs some prefix of the children
  (possibly empty, covering trees with no group at all), and
* one near-prefix class per feasible j, whose group absorbs child j
  plus some prefix ending below j.

Each class is swept incrementally: extending a forest table over the
first l subtrees to cover subtree l+1 is a max-plus combination of two
small tables, plus a fresh "absorb everything so far" entry at forest
size 1.  Children v_1 .. v_{d_v - K + 1} can never be split off within a
K-node budget, so they are absorbed into the sweep's seed unprocessed;
this, together with the table caps at K-1, is what keeps the total
sweep cost within the 2Kn pair-cost budget that ``CostCounter`` tracks.

Ties are broken deterministically: prefix class first, then near-prefix
classes by increasing j, then the smallest left-table split inside a
max-plus combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .entropy_core import _term, _terms
from .summary import InvariantError, SummaryNode, SummaryTree, attach_members
from .tree_model import CanonicalTree

__all__ = [
    "CostCounter",
    "DPTables",
    "solve_exact",
    "reconstruct",
    "sweep_prefix_class",
    "sweep_near_prefix_class",
]

NEG_INF = float("-inf")


@dataclass
class CostCounter:
    """Accumulates the pairwise sweep cost sum(min(prefix, K) * min(child, K)).

    One term is charged per prefix-class combining step, using the full
    descendant count of the already-covered child prefix.  After a full
    solve the total is at most 2*K*n.
    """

    pair_cost: int = 0


@dataclass
class _Chain:
    """A compressed descending chain of zero-weight nodes (reduced trees only).

    ``seq`` lists the chain nodes top-down as (node, zero_leaf_or_0);
    ``bottom`` is the positively-sized child under the last chain node.
    The table at the top is the bottom's table shifted by l + lprime.
    """

    top: int
    bottom: int
    l: int
    lprime: int
    seq: tuple[tuple[int, int], ...]


@dataclass
class _RawNode:
    kind: str
    anchor: int
    parent: int
    child_roots: tuple[int, ...] = ()


def _skew_maxplus(G: np.ndarray, B: np.ndarray, want_arg: bool):
    """Max-plus combination out[t-2] = max_h G[h-1] + B[t-h-1], t = 2..len(G)+len(B).

    Returns (out, arg) where arg[t-2] = h-1 for the smallest maximizing h
    (``arg`` is None unless ``want_arg``).
    """
    lg = G.shape[0]
    lb = B.shape[0]
    if lb == 1:
        out = G + B[0]
        return out, (np.arange(lg, dtype=np.int64) if want_arg else None)
    if lg == 1:
        out = G[0] + B
        return out, (np.zeros(lb, dtype=np.int64) if want_arg else None)
    M = np.add.outer(G, B)
    P = np.full((lg, lg + lb), NEG_INF)
    P[:, :lb] = M
    S = P.ravel()[:-lg].reshape(lg, lg + lb - 1)
    out = S.max(axis=0)
    arg = S.argmax(axis=0) if want_arg else None
    return out, arg


def _sweep_tables(
    tables: Sequence[np.ndarray],
    sizes: Sequence[float],
    counts: Sequence[int],
    pent,
    K: int,
    seed_weight: float,
    seed_nonempty: bool,
    start_pos: int,
    skip: int,
    record: bool,
):
    """Forest-table sweep shared by all candidate classes.

    ``tables[i]`` holds the best pseudo-entropies of summary trees of the
    (i+1)-th swept subtree, truncated to forest-feasible sizes.  Children
    before ``start_pos`` (and child ``skip``, when nonzero) are already in
    the seed, whose total weight is ``seed_weight``.

    Returns (G, steps, base_pos): G[t-1] is the best t-node forest;
    ``steps`` (recording mode only) holds (position, argmax rows) per
    combining step; ``base_pos`` is the position whose table seeded the
    sweep when the seed was empty, else 0.
    """
    d = len(tables)
    steps = [] if record else None
    if seed_nonempty:
        G = np.array([pent(seed_weight)])
        cum = seed_weight
        avail = 1
        pos_iter = range(start_pos, d + 1)
        base_pos = 0
    else:
        G = tables[0]
        cum = float(sizes[0])
        avail = int(counts[0])
        pos_iter = range(2, d + 1)
        base_pos = 1
    for pos in pos_iter:
        if pos == skip:
            continue
        B = tables[pos - 1]
        out, arg = _skew_maxplus(G, B, record)
        c = int(counts[pos - 1])
        new_avail = min(K - 1, avail + c)
        cum += float(sizes[pos - 1])
        newG = np.empty(new_avail)
        newG[0] = pent(cum)
        if new_avail > 1:
            newG[1:] = out[: new_avail - 1]
        if record:
            steps.append((pos, arg))
        G = newG
        avail += c
    return G, steps, base_pos


def sweep_prefix_class(
    children: Sequence[tuple[Sequence[float], float, int]],
    total_weight: float,
    K: int,
    forced_weights: Sequence[float] = (),
) -> np.ndarray:
    """Best forest table when the group may only absorb a child prefix.

    ``children`` are (table, size, count) triples in nondecreasing size
    order, where table[t-1] is the best pseudo-entropy of a t-node
    summary tree of that subtree.  ``forced_weights`` are subtree weights
    absorbed into the group before the sweep starts.  Returns G with
    G[t-1] the best pseudo-entropy of a t-node summary forest.
    """
    tables = [np.asarray(tb, dtype=np.float64) for tb, _, _ in children]
    sizes = [s for _, s, _ in children]
    counts = [c for _, _, c in children]
    pent = lambda x: _term(x, total_weight)
    seed = float(sum(forced_weights))
    G, _, _ = _sweep_tables(
        tables, sizes, counts, pent, K, seed, bool(forced_weights), 1, 0, False
    )
    return G


def sweep_near_prefix_class(
    children: Sequence[tuple[Sequence[float], float, int]],
    total_weight: float,
    K: int,
    j: int,
    forced_weights: Sequence[float] = (),
) -> np.ndarray:
    """Best forest table when the group absorbs child ``j`` plus a prefix.

    Identical to :func:`sweep_prefix_class` except the seed additionally
    holds subtree j's weight and the sweep skips it.

    Raises:
        ValueError: j out of range.
    """
    if not 1 <= j <= len(children):
        raise ValueError(f"non-prefix child index {j} out of range")
    tables = [np.asarray(tb, dtype=np.float64) for tb, _, _ in children]
    sizes = [s for _, s, _ in children]
    counts = [c for _, _, c in children]
    pent = lambda x: _term(x, total_weight)
    seed = float(sum(forced_weights)) + float(sizes[j - 1])
    G, _, _ = _sweep_tables(tables, sizes, counts, pent, K, seed, True, 1, j, False)
    return G


class _Engine:
    """Bottom-up DP over a canonical tree; shared by exact, greedy, and reduced runs."""

    def __init__(
        self,
        tree: CanonicalTree,
        K: int,
        mode: str = "exact",
        chains: Optional[dict] = None,
        chain_skip: Optional[frozenset] = None,
    ):
        if K < 1:
            raise ValueError("K must be >= 1")
        self.t = tree
        self.K = K
        self.mode = mode
        self.chains = chains or {}
        self.chain_skip = chain_skip or frozenset()
        self.cost = CostCounter()
        W = tree.W
        log2 = math.log2

        def pent(x: float) -> float:
            if x <= 0.0:
                return 0.0
            p = x / W
            return -p * log2(p)

        self._pent = pent
        n = tree.n
        caps = np.minimum(K, tree.count).astype(np.int64)
        caps[0] = 0
        offs = np.zeros(n + 1, dtype=np.int64)
        offs[1:] = np.cumsum(caps[1:]) - caps[1:]
        self.caps = caps
        self.offs = offs
        self.F = np.empty(int(caps.sum()), dtype=np.float64)
        self.pw = np.zeros(n + 1)
        self.ps = np.zeros(n + 1)
        self.pw[1:] = _terms(tree.weight[1:], W)
        self.ps[1:] = _terms(tree.size[1:], W)
        self._solve()

    # -- solving ---------------------------------------------------------- #

    def _solve(self) -> None:
        t = self.t
        deg = t.degree
        leaves = np.flatnonzero(deg[1:] == 0) + 1
        self.F[self.offs[leaves]] = self.ps[leaves]
        internal = (np.flatnonzero(deg[1:] > 0) + 1)[::-1]
        chains = self.chains
        skip = self.chain_skip
        for v in internal:
            v = int(v)
            if chains:
                if v in skip:
                    continue
                ch = chains.get(v)
                if ch is not None:
                    self._fill_chain_top(ch)
                    continue
            self._fill_node(v)

    def _fill_chain_top(self, ch: _Chain) -> None:
        off_v = self.offs[ch.top]
        cap_v = int(self.caps[ch.top])
        off_u = self.offs[ch.bottom]
        shift = ch.l + ch.lprime
        s = min(shift, cap_v)
        self.F[off_v : off_v + s] = self.F[off_u]
        if cap_v > s:
            self.F[off_v + s : off_v + cap_v] = self.F[off_u : off_u + cap_v - s]

    def _child_views(self, fc: int, d: int):
        K1 = self.K - 1
        offs = self.offs
        caps = self.caps
        F = self.F
        return [
            F[offs[c] : offs[c] + min(K1, caps[c])] for c in range(fc, fc + d)
        ]

    def _sweep_start(self, d: int) -> int:
        if self.mode == "greedy":
            return max(1, d - self.K + 1)
        return max(1, d - self.K + 2)

    def _near_prefix_js(self, d: int) -> range:
        if self.mode == "greedy":
            return range(0)
        return range(max(3, d - self.K + 3), d + 1)

    def _fill_node(self, v: int) -> None:
        t = self.t
        off_v = self.offs[v]
        cap_v = int(self.caps[v])
        self.F[off_v] = self.ps[v]
        if cap_v == 1:
            return
        d = int(t.degree[v])
        fc = int(t.first_child[v])
        sizes = t.size[fc : fc + d]
        counts = t.count[fc : fc + d]
        a = self._sweep_start(d)
        self.cost.pair_cost += _prefix_charge(counts, a, self.K)
        tables = self._child_views(fc, d)
        seed = float(sizes[: a - 1].sum()) if a > 1 else 0.0
        best, _, _ = _sweep_tables(
            tables, sizes, counts, self._pent, self.K, seed, a > 1, a, 0, False
        )
        for j in self._near_prefix_js(d):
            Gj, _, _ = _sweep_tables(
                tables,
                sizes,
                counts,
                self._pent,
                self.K,
                seed + float(sizes[j - 1]),
                True,
                a,
                j,
                False,
            )
            m = min(Gj.shape[0], best.shape[0])
            np.maximum(best[:m], Gj[:m], out=best[:m])
        self.F[off_v + 1 : off_v + cap_v] = self.pw[v] + best[: cap_v - 1]

    # -- reconstruction --------------------------------------------------- #

    def value(self, v: int, k: int) -> float:
        cap = int(self.caps[v])
        if not 1 <= k <= cap:
            raise ValueError(f"k={k} outside 1..{cap} for node {v}")
        return float(self.F[self.offs[v] + k - 1])

    def rebuild(self, k: int) -> list[_RawNode]:
        cap = int(self.caps[1])
        if not 1 <= k <= cap:
            raise ValueError(f"k={k} outside 1..{cap}")
        t = self.t
        nodes: list[_RawNode] = []
        stack: list[tuple[int, int, int]] = [(1, k, -1)]
        while stack:
            v, kk, par = stack.pop()
            if kk > 1 and self.chains and v in self.chains:
                self._walk_chain(self.chains[v], kk, par, nodes, stack)
                continue
            if kk == 1 or int(t.count[v]) == 1:
                nodes.append(self._collapsed(v, par))
                continue
            other, splits = self._rebuild_node(v, kk)
            me = len(nodes)
            nodes.append(_RawNode("singleton", v, par))
            if other:
                nodes.append(_RawNode("group", v, me, tuple(sorted(other))))
            for c, kc in sorted(splits, reverse=True):
                stack.append((c, kc, me))
        return nodes

    def _collapsed(self, v: int, par: int) -> _RawNode:
        kind = "subtree" if int(self.t.count[v]) > 1 else "singleton"
        return _RawNode(kind, v, par)

    def _walk_chain(self, ch: _Chain, kk: int, par: int, nodes, stack) -> None:
        """Re-materialize a zero-weight chain: peel singletons down to the budget."""
        b = kk
        cur = par
        seq = ch.seq
        for idx, (vi, zi) in enumerate(seq):
            if b == 1:
                nodes.append(self._collapsed(vi, cur))
                return
            me = len(nodes)
            nodes.append(_RawNode("singleton", vi, cur))
            cur = me
            b -= 1
            if zi:
                if b == 1:
                    nxt = seq[idx + 1][0] if idx + 1 < len(seq) else ch.bottom
                    nodes.append(_RawNode("group", vi, cur, tuple(sorted((zi, nxt)))))
                    return
                nodes.append(self._collapsed(zi, cur))
                b -= 1
        stack.append((ch.bottom, b, cur))

    def _rebuild_node(self, v: int, kk: int):
        t = self.t
        d = int(t.degree[v])
        fc = int(t.first_child[v])
        sizes = t.size[fc : fc + d]
        counts = t.count[fc : fc + d]
        a = self._sweep_start(d)
        tables = self._child_views(fc, d)
        seed = float(sizes[: a - 1].sum()) if a > 1 else 0.0
        kf = kk - 1

        candidates = []
        G, steps, base_pos = _sweep_tables(
            tables, sizes, counts, self._pent, self.K, seed, a > 1, a, 0, True
        )
        candidates.append((G, steps, base_pos, 0))
        for j in self._near_prefix_js(d):
            Gj, stepsj, basej = _sweep_tables(
                tables,
                sizes,
                counts,
                self._pent,
                self.K,
                seed + float(sizes[j - 1]),
                True,
                a,
                j,
                True,
            )
            candidates.append((Gj, stepsj, basej, j))

        best = None
        best_val = NEG_INF
        for cand in candidates:
            Gc = cand[0]
            val = Gc[kf - 1] if kf <= Gc.shape[0] else NEG_INF
            if val > best_val:
                best_val = val
                best = cand
        got = self.pw[v] + best_val
        want = self.value(v, kk)
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            raise InvariantError(
                f"reconstruction value {got} disagrees with table {want} at node {v}, k={kk}"
            )

        _, steps, base_pos, skip = best
        seed_positions = list(range(1, a))
        if skip:
            seed_positions.append(skip)
        tpos = kf
        splits_pos: list[tuple[int, int]] = []
        i = len(steps) - 1
        while i >= 0 and tpos >= 2:
            pos, arg = steps[i]
            h = int(arg[tpos - 2]) + 1
            splits_pos.append((pos, tpos - h))
            tpos = h
            i -= 1
        if tpos >= 2:
            if not base_pos:
                raise InvariantError("sweep backtrack escaped the seed")
            splits_pos.append((base_pos, tpos))
            other_pos: list[int] = []
        else:
            other_pos = list(seed_positions) + [steps[jj][0] for jj in range(i + 1)]
            if base_pos:
                other_pos.append(base_pos)
            if len(other_pos) == 1:
                splits_pos.append((other_pos[0], 1))
                other_pos = []
        other = [fc + p - 1 for p in other_pos]
        splits = [(fc + p - 1, kc) for p, kc in splits_pos]
        return other, splits


def _prefix_charge(counts: np.ndarray, a: int, K: int) -> int:
    """Pair-cost terms of one prefix-class sweep over the given child counts."""
    d = len(counts)
    if d == 0:
        return 0
    if a > 1:
        pref = int(counts[: a - 1].sum())
        start = a
    else:
        pref = int(counts[0])
        start = 2
    total = 0
    for pos in range(start, d + 1):
        c = int(counts[pos - 1])
        total += min(pref, K) * min(c, K)
        pref += c
    return total


class DPTables:
    """Solved per-node tables F(v, k) plus reconstruction.

    F(v, k) is the maximum pseudo-entropy of any k-node summary tree of
    v's subtree, defined for 1 <= k <= min(K, n_v).  At the root the
    pseudo-entropy equals the entropy, so ``entropy_bits(k)`` reads the
    table directly.
    """

    def __init__(self, engine: _Engine):
        self._engine = engine

    @property
    def tree(self) -> CanonicalTree:
        return self._engine.t

    @property
    def K(self) -> int:
        return self._engine.K

    @property
    def max_k(self) -> int:
        return int(self._engine.caps[1])

    @property
    def cost(self) -> CostCounter:
        return self._engine.cost

    @property
    def pair_cost(self) -> int:
        return self._engine.cost.pair_cost

    def value(self, v: int, k: int) -> float:
        """F(v, k): best pseudo-entropy of a k-node summary tree of subtree v."""
        return self._engine.value(v, k)

    def entropy_bits(self, k: int) -> float:
        """Maximum entropy (bits) over k-node summary trees of the whole tree."""
        return self._engine.value(1, k)

    def all_entropy_bits(self) -> list[float]:
        return [self.entropy_bits(k) for k in range(1, self.max_k + 1)]

    def reconstruct(self, k: int) -> SummaryTree:
        """Materialize an optimal k-node summary tree."""
        t = self.tree
        raw = self._engine.rebuild(k)
        size = t.size
        weight = t.weight
        nodes = []
        for r in raw:
            if r.kind == "singleton":
                w = float(weight[r.anchor])
            elif r.kind == "subtree":
                w = float(size[r.anchor])
            else:
                w = float(sum(size[c] for c in r.child_roots))
            nodes.append(SummaryNode(r.kind, r.anchor, r.parent, w, (), r.child_roots))
        ent = float(_terms(np.array([nd.weight for nd in nodes]), t.W).sum())
        tree = SummaryTree(k, ent, t.W, nodes)
        return attach_members(tree, t)


def solve_exact(t: CanonicalTree, K: int) -> DPTables:
    """Solve for maximum-entropy summary trees of every order k <= K.

    Runs in O(K^2 n + n log n) including canonicalization; the returned
    tables cover 1 <= k <= min(K, n) and support reconstruction.
    """
    return DPTables(_Engine(t, K, mode="exact"))


def reconstruct(tables: DPTables, k: int) -> SummaryTree:
    """Materialize the optimal k-node summary tree recorded in ``tables``."""
    return tables.reconstruct(k)
