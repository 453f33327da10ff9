"""Junction-tree decomposition into ring-system and non-ring-bond fragments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from scpt.molgraph import Molecule, induced_submolecule

NodeKind = Literal["ring", "bond", "atom"]


@dataclass(frozen=True)
class JTNode:
    label: str
    atoms: tuple[int, ...]
    bonds: tuple[int, ...]
    kind: NodeKind
    attachments: int


@dataclass(frozen=True)
class JunctionTree:
    nodes: tuple[JTNode, ...]
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @classmethod
    def from_parts(cls, nodes, edges) -> "JunctionTree":
        edges = tuple(sorted((min(e), max(e)) for e in edges))
        adj: list[list[int]] = [[] for _ in nodes]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        return cls(tuple(nodes), edges, tuple(tuple(sorted(a)) for a in adj))

    @property
    def labels(self) -> list[str]:
        return [n.label for n in self.nodes]

    def __len__(self) -> int:
        return len(self.nodes)


def _ring_systems(mol: Molecule) -> list[set[int]]:
    """Union basis rings that share two or more atoms."""
    rings = [set(r) for r in mol.rings]
    parent = list(range(len(rings)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if len(rings[i] & rings[j]) >= 2:
                parent[find(i)] = find(j)
    groups: dict[int, set[int]] = {}
    for i, r in enumerate(rings):
        groups.setdefault(find(i), set()).update(r)
    return sorted(groups.values(), key=lambda s: min(s))


def fragment_label(mol: Molecule, atoms, bonds) -> str:
    """Canonical SMILES of a fragment with one ``[*]`` per external bond."""
    return induced_submolecule(mol, atoms, bonds).canonical_form


def junction_tree(mol: Molecule) -> JunctionTree:
    frags: list[tuple[set[int], set[int], NodeKind]] = []
    for system in _ring_systems(mol):
        bonds = {k for k, b in enumerate(mol.bonds) if b.in_ring and b.begin in system and b.end in system}
        frags.append((system, bonds, "ring"))
    for k, b in enumerate(mol.bonds):
        if not b.in_ring:
            frags.append(({b.begin, b.end}, {k}, "bond"))
    if not frags:  # a lone atom
        frags.append(({0}, set(), "atom"))

    owners: dict[int, list[int]] = {}
    for f, (atoms, _, _) in enumerate(frags):
        for a in atoms:
            owners.setdefault(a, []).append(f)

    edges: list[tuple[int, int]] = []
    for a in sorted(owners):
        fs = owners[a]
        if len(fs) == 2:
            edges.append((fs[0], fs[1]))
        elif len(fs) >= 3:
            # an atom shared by three or more fragments becomes its own node
            hub = len(frags)
            frags.append(({a}, set(), "atom"))
            edges.extend((hub, f) for f in fs)

    nodes = []
    for atoms, bonds, kind in frags:
        sub = induced_submolecule(mol, atoms, bonds)
        attachments = sum(1 for x in sub.atoms if x.is_dummy)
        nodes.append(JTNode(sub.canonical_form, tuple(sorted(atoms)), tuple(sorted(bonds)), kind, attachments))
    return JunctionTree.from_parts(nodes, edges)
