from __future__ import annotations

from pathlib import Path

import networkx as nx
import pytest

from scpt.molgraph import Molecule

DATA = Path(__file__).resolve().parents[1] / "src" / "scpt" / "data"
FIXTURES = Path(__file__).resolve().parent / "data"


def to_nx(mol: Molecule) -> nx.Graph:
    g = nx.Graph()
    for i, a in enumerate(mol.atoms):
        g.add_node(i, key=(a.element, a.charge, a.aromatic, a.hydrogen_count))
    for b in mol.bonds:
        g.add_edge(b.begin, b.end, order=int(b.order))
    return g


def isomorphic(a: Molecule, b: Molecule) -> bool:
    return nx.is_isomorphic(
        to_nx(a), to_nx(b),
        node_match=lambda x, y: x["key"] == y["key"],
        edge_match=lambda x, y: x["order"] == y["order"],
    )


def read_smi(name: str) -> list[str]:
    return [ln.strip() for ln in (DATA / name).read_text().splitlines() if ln.strip()]


@pytest.fixture(scope="session")
def corpus_1k() -> list[str]:
    return read_smi("corpus_1k.smi")


@pytest.fixture(scope="session")
def toy_200() -> list[str]:
    return read_smi("toy_200.smi")


# --- oracles shared by module tests and the acceptance suite ---------------------

TREE_LABELS = ("A", "B", "C", "D")


def random_tree(rng, n: int) -> tuple[list[str], list[tuple[int, int]]]:
    labels = [rng.choice(TREE_LABELS) for _ in range(n)]
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return labels, edges


def _shuffle_tree(rng, labels, edges):
    order = list(range(len(labels)))
    rng.shuffle(order)
    pos = {old: new for new, old in enumerate(order)}
    return [labels[i] for i in order], [(pos[u], pos[v]) for u, v in edges]


def _edit_tree(rng, labels, edges):
    labels, edges = list(labels), list(edges)
    op = rng.choice(("relabel", "insert", "delete"))
    if op == "relabel":
        i = rng.randrange(len(labels))
        labels[i] = rng.choice(TREE_LABELS)
    elif op == "insert" and len(labels) < 8:
        edges.append((rng.randrange(len(labels)), len(labels)))
        labels.append(rng.choice(TREE_LABELS))
    elif op == "delete" and len(labels) > 1:
        deg = [0] * len(labels)
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        leaf = rng.choice([i for i, d in enumerate(deg) if d <= 1])
        keep = [i for i in range(len(labels)) if i != leaf]
        pos = {old: new for new, old in enumerate(keep)}
        labels = [labels[i] for i in keep]
        edges = [(pos[u], pos[v]) for u, v in edges if leaf not in (u, v)]
    return labels, edges


def random_tree_pair(rng):
    """Two labelled trees (<= 8 nodes) that are often, but not always, within one edit."""
    from scpt.decompose import LabeledTree

    la, ea = random_tree(rng, rng.randint(1, 7))
    kind = rng.random()
    if kind < 0.15:
        lb, eb = random_tree(rng, rng.randint(1, 8))
    else:
        lb, eb = la, ea
        for _ in range(rng.choice((0, 1, 1, 1, 2))):
            lb, eb = _edit_tree(rng, lb, eb)
    lb, eb = _shuffle_tree(rng, lb, eb)
    return LabeledTree.from_edges(la, ea), LabeledTree.from_edges(lb, eb)


def brute_mcs_size(a: Molecule, b: Molecule) -> int:
    """Largest connected induced common subgraph by enumerating atom subsets of the smaller molecule."""
    from itertools import combinations

    from networkx.algorithms.isomorphism import GraphMatcher

    small, big = (a, b) if len(a.atoms) <= len(b.atoms) else (b, a)
    gs, gb = nx.Graph(), nx.Graph()
    for g, m in ((gs, small), (gb, big)):
        for i, x in enumerate(m.atoms):
            g.add_node(i, lab=(x.element, x.aromatic))
        for bd in m.bonds:
            g.add_edge(bd.begin, bd.end, order=int(bd.order))
    for k in range(len(small.atoms), 0, -1):
        for subset in combinations(range(len(small.atoms)), k):
            sub = gs.subgraph(subset)
            if not nx.is_connected(sub):
                continue
            gm = GraphMatcher(gb, sub, node_match=lambda x, y: x["lab"] == y["lab"],
                              edge_match=lambda x, y: x["order"] == y["order"])
            if gm.subgraph_is_isomorphic():
                return k
    return 0
