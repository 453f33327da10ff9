"""Fragment-level edit distance between junction trees.

Cost model (unit costs): deleting or inserting a fragment node costs 1 and
takes its incident edges with it; substituting a node's label costs 1; an
edge present between two kept nodes on one side but not between their
images on the other costs 1.

Under this model a distance of at most one means one of:

* the labelled trees are isomorphic (0);
* relabelling a single node makes them isomorphic (substitution);
* removing one leaf from the larger tree makes them isomorphic
  (insertion or deletion).

``dfged_le1`` decides exactly that with canonical tree encodings;
``exhaustive_tree_ged`` computes the full distance by branch and bound and is
only meant for small trees in tests.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Literal, Sequence

from scpt.errors import SizeLimitExceeded
from scpt.decompose.jtree import JunctionTree

EXHAUSTIVE_LIMIT = 8

Operation = Literal["identical", "substitute", "insert", "delete"]


@dataclass(frozen=True)
class EditVerdict:
    distance_le_one: bool
    distance: int | None = None  # 0 or 1 when distance_le_one, else None (> 1)
    operation: Operation | None = None
    substitution: tuple[str, str] | None = None
    is_single_fragment: bool = False


@dataclass(frozen=True)
class LabeledTree:
    """Minimal labelled tree used by the distance routines."""

    labels: tuple[str, ...]
    adjacency: tuple[tuple[int, ...], ...]
    attachments: tuple[int, ...] | None = None

    @classmethod
    def from_junction_tree(cls, jt: JunctionTree) -> "LabeledTree":
        return cls(tuple(jt.labels), jt.adjacency, tuple(n.attachments for n in jt.nodes))

    @classmethod
    def from_edges(cls, labels: Sequence[str], edges: Sequence[tuple[int, int]]) -> "LabeledTree":
        adj: list[list[int]] = [[] for _ in labels]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        return cls(tuple(labels), tuple(tuple(sorted(a)) for a in adj))

    def __len__(self) -> int:
        return len(self.labels)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(len(self.labels)) for v in self.adjacency[u] if u < v]


def _as_tree(t: JunctionTree | LabeledTree) -> LabeledTree:
    return t if isinstance(t, LabeledTree) else LabeledTree.from_junction_tree(t)


# --- canonical encoding ----------------------------------------------------

def _centers(adj: Sequence[Sequence[int]], alive: Sequence[bool]) -> list[int]:
    nodes = [v for v in range(len(adj)) if alive[v]]
    if len(nodes) <= 2:
        return nodes
    degree = {v: sum(1 for u in adj[v] if alive[u]) for v in nodes}
    layer = [v for v in nodes if degree[v] <= 1]
    remaining = len(nodes)
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for u in adj[v]:
                if alive[u] and degree[u] > 0:
                    degree[u] -= 1
                    if degree[u] == 1:
                        nxt.append(u)
            degree[v] = 0
        layer = nxt
    return sorted(layer)


def _encode_rooted(root: int, labels: Sequence[str], adj, alive) -> tuple:
    # iterative post-order so deep chains do not hit the recursion limit
    order, parent = [], {root: -1}
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        for u in adj[v]:
            if alive[u] and u != parent[v]:
                parent[u] = v
                stack.append(u)
    enc: dict[int, tuple] = {}
    for v in reversed(order):
        kids = sorted(enc[u] for u in adj[v] if alive[u] and parent.get(u) == v)
        enc[v] = (labels[v], tuple(kids))
    return enc[root]


def tree_code(labels: Sequence[str], adj: Sequence[Sequence[int]], alive: Sequence[bool] | None = None) -> tuple:
    """Canonical encoding of an unrooted labelled tree (equal iff isomorphic)."""
    if alive is None:
        alive = [True] * len(labels)
    centers = _centers(adj, alive)
    if not centers:
        return ()
    return min(_encode_rooted(c, labels, adj, alive) for c in centers)


# --- decision procedure ----------------------------------------------------

def dfged_le1(a: JunctionTree | LabeledTree, b: JunctionTree | LabeledTree, *, strict: bool = True) -> EditVerdict:
    """Decide whether the fragment edit distance is at most one.

    ``is_single_fragment`` requires the distance-one edit to be a label
    substitution; with ``strict`` the two fragments must also have the same
    number of attachment points (neighbour labels already agree because the
    rest of the tree matches exactly).
    """
    ta, tb = _as_tree(a), _as_tree(b)
    na, nb = len(ta), len(tb)
    if abs(na - nb) > 1:
        return EditVerdict(False)
    ca, cb = Counter(ta.labels), Counter(tb.labels)

    if na == nb:
        if ca == cb:
            if tree_code(ta.labels, ta.adjacency) == tree_code(tb.labels, tb.adjacency):
                return EditVerdict(True, 0, "identical")
            return EditVerdict(False)
        only_a, only_b = ca - cb, cb - ca
        if sum(only_a.values()) != 1 or sum(only_b.values()) != 1:
            return EditVerdict(False)
        (old,), (new,) = only_a, only_b
        target = tree_code(tb.labels, tb.adjacency)
        new_at = [v for v, lab in enumerate(tb.labels) if lab == new]
        for v, lab in enumerate(ta.labels):
            if lab != old:
                continue
            relabeled = list(ta.labels)
            relabeled[v] = new
            if tree_code(relabeled, ta.adjacency) != target:
                continue
            single = True
            if strict and ta.attachments is not None and tb.attachments is not None:
                # the image of v carries label `new` and sits at the same tree position
                single = any(tb.attachments[w] == ta.attachments[v] for w in new_at)
            return EditVerdict(True, 1, "substitute", (old, new), single)
        return EditVerdict(False)

    big, small, op = (ta, tb, "delete") if na > nb else (tb, ta, "insert")
    extra = Counter(big.labels) - Counter(small.labels)
    if sum(extra.values()) != 1:
        return EditVerdict(False)
    (lab,) = extra
    target = tree_code(small.labels, small.adjacency)
    for v, l2 in enumerate(big.labels):
        if l2 != lab or len(big.adjacency[v]) > 1:
            continue
        alive = [True] * len(big)
        alive[v] = False
        if tree_code(big.labels, big.adjacency, alive) == target:
            return EditVerdict(True, 1, op)
    return EditVerdict(False)


# --- exhaustive oracle -----------------------------------------------------

def exhaustive_tree_ged(a: JunctionTree | LabeledTree, b: JunctionTree | LabeledTree,
                        limit: int = EXHAUSTIVE_LIMIT) -> int:
    """Exact unit-cost fragment edit distance by branch and bound over node maps."""
    ta, tb = _as_tree(a), _as_tree(b)
    if max(len(ta), len(tb)) > limit:
        raise SizeLimitExceeded(f"exhaustive GED limited to {limit} nodes, got {max(len(ta), len(tb))}")
    na, nb = len(ta), len(tb)
    adj_a = [set(x) for x in ta.adjacency]
    adj_b = [set(x) for x in tb.adjacency]

    # visit a's nodes breadth-first so most edges are checked early
    order: list[int] = []
    seen = [False] * na
    for s in range(na):
        if seen[s]:
            continue
        seen[s] = True
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in sorted(adj_a[v]):
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)

    best = na + nb  # delete everything, insert everything
    image: dict[int, int] = {}  # a node -> b node (deleted nodes absent)
    used = [False] * nb

    def lower_bound(depth: int) -> int:
        rest_a = Counter(ta.labels[v] for v in order[depth:])
        free_b = Counter(tb.labels[w] for w in range(nb) if not used[w])
        common = sum((rest_a & free_b).values())
        return max(sum(rest_a.values()), sum(free_b.values())) - common

    def search(depth: int, cost: int) -> None:
        nonlocal best
        if cost + lower_bound(depth) >= best:
            return
        if depth == na:
            best = cost + sum(1 for w in range(nb) if not used[w])
            return
        v = order[depth]
        for w in range(nb):
            if used[w]:
                continue
            step = 0 if ta.labels[v] == tb.labels[w] else 1
            for u, x in image.items():
                if (u in adj_a[v]) != (x in adj_b[w]):
                    step += 1
            used[w] = True
            image[v] = w
            search(depth + 1, cost + step)
            del image[v]
            used[w] = False
        search(depth + 1, cost + 1)  # delete v

    search(0, 0)
    return best
