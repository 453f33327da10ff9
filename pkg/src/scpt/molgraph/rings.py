"""Ring perception: bridge detection and a minimum cycle basis.

The basis is built greedily from candidate cycles sorted by length, keeping
each candidate that is linearly independent (over GF(2), edges as bits) of
those already kept.  Candidates are first the shortest cycle through every
ring edge; if those do not span the cycle space the full Horton set is used.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

Edge = tuple[int, int]


def find_bridges(n_atoms: int, edges: Sequence[Edge]) -> set[int]:
    """Return indices of edges whose removal disconnects the graph."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))

    disc = [-1] * n_atoms
    low = [0] * n_atoms
    bridges: set[int] = set()
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        # iterative DFS: (node, edge used to enter, iterator position)
        stack = [(root, -1, 0)]
        while stack:
            node, via, pos = stack[-1]
            if pos < len(adj[node]):
                stack[-1] = (node, via, pos + 1)
                nbr, k = adj[node][pos]
                if k == via:
                    continue
                if disc[nbr] == -1:
                    disc[nbr] = low[nbr] = timer
                    timer += 1
                    stack.append((nbr, k, 0))
                else:
                    low[node] = min(low[node], disc[nbr])
            else:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[node])
                    if low[node] > disc[parent]:
                        bridges.add(via)
    return bridges


def _bfs_tree(root: int, adj: list[list[tuple[int, int]]], banned: int = -1):
    parent = {root: (-1, -1)}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for nbr, k in adj[node]:
            if k == banned or nbr in parent:
                continue
            parent[nbr] = (node, k)
            queue.append(nbr)
    return parent


def _path_edges(parent, node: int) -> list[int]:
    out = []
    while parent[node][0] != -1:
        node, k = parent[node]
        out.append(k)
    return out


def _path_nodes(parent, node: int) -> list[int]:
    out = [node]
    while parent[node][0] != -1:
        node = parent[node][0]
        out.append(node)
    return out


class _Gf2Basis:
    """Incremental row-echelon basis of edge bitsets."""

    def __init__(self) -> None:
        self.rows: dict[int, int] = {}  # pivot bit -> row

    def add(self, vec: int) -> bool:
        while vec:
            pivot = vec.bit_length() - 1
            row = self.rows.get(pivot)
            if row is None:
                self.rows[pivot] = vec
                return True
            vec ^= row
        return False


def _order_cycle(edge_ids: Sequence[int], edges: Sequence[Edge]) -> tuple[int, ...]:
    """Walk a simple cycle given as edge ids and return its atoms in ring order."""
    adj: dict[int, list[int]] = {}
    for k in edge_ids:
        u, v = edges[k]
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    start = min(adj)
    a, b = sorted(adj[start])
    ring = [start]
    prev, cur = start, a
    while cur != start:
        ring.append(cur)
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        prev, cur = cur, nxt
    return tuple(ring)


def _is_simple_cycle(edge_ids: Sequence[int], edges: Sequence[Edge]) -> bool:
    deg: dict[int, int] = {}
    for k in edge_ids:
        for x in edges[k]:
            deg[x] = deg.get(x, 0) + 1
    return all(d == 2 for d in deg.values())


def minimum_cycle_basis(n_atoms: int, edges: Sequence[Edge]) -> list[tuple[int, ...]]:
    """Minimum cycle basis of an undirected simple graph.

    Returns cycles as atom tuples in ring order (starting at the lowest
    index), sorted by (length, atoms).  The number of cycles equals the
    cyclomatic number ``|E| - |V| + components``.
    """
    bridges = find_bridges(n_atoms, edges)
    ring_edges = [k for k in range(len(edges)) if k not in bridges]
    if not ring_edges:
        return []

    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    ring_atoms: set[int] = set()
    for k in ring_edges:
        u, v = edges[k]
        adj[u].append((v, k))
        adj[v].append((u, k))
        ring_atoms.update((u, v))

    # cyclomatic number of the ring subgraph
    comps = 0
    seen: set[int] = set()
    for a in ring_atoms:
        if a not in seen:
            comps += 1
            seen.update(_bfs_tree(a, adj))
    rank = len(ring_edges) - len(ring_atoms) + comps

    candidates: dict[int, int] = {}  # bitset -> length
    for k in ring_edges:
        u, v = edges[k]
        parent = _bfs_tree(u, adj, banned=k)
        path = _path_edges(parent, v)
        vec = 1 << k
        for e in path:
            vec |= 1 << e
        candidates[vec] = len(path) + 1

    basis = _select(candidates, rank)
    if len(basis) < rank:
        basis = _select(_horton_candidates(ring_atoms, adj, edges), rank)

    cycles = []
    for vec in basis:
        ids = [k for k in range(len(edges)) if vec >> k & 1]
        cycles.append(_order_cycle(ids, edges))
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


def _select(candidates: dict[int, int], rank: int) -> list[int]:
    basis = _Gf2Basis()
    chosen = []
    for vec, _ in sorted(candidates.items(), key=lambda kv: (kv[1], kv[0])):
        if basis.add(vec):
            chosen.append(vec)
            if len(chosen) == rank:
                break
    return chosen


def _horton_candidates(ring_atoms, adj, edges) -> dict[int, int]:
    out: dict[int, int] = {}
    ring_edge_ids = sorted({k for a in ring_atoms for _, k in adj[a]})
    for root in sorted(ring_atoms):
        parent = _bfs_tree(root, adj)
        for k in ring_edge_ids:
            x, y = edges[k]
            px = _path_edges(parent, x)
            py = _path_edges(parent, y)
            if k in px or k in py:
                continue
            nx_ = set(_path_nodes(parent, x))
            ny_ = set(_path_nodes(parent, y))
            if nx_ & ny_ != {root}:
                continue
            ids = px + py + [k]
            if not _is_simple_cycle(ids, edges):
                continue
            vec = 0
            for e in ids:
                vec |= 1 << e
            out[vec] = len(ids)
    return out
