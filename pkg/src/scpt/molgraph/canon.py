"""Canonical atom ranking and canonical SMILES.

Ranks start from the atom invariant (element, charge, degree, H count,
aromatic) and are refined Morgan-style by the sorted multiset of
(neighbour rank, bond order) until the partition is stable.  Remaining ties
are broken by individualising each member of the first tied class in turn;
every leaf of that search writes a SMILES string and the smallest one wins.
Leaves that write the same string reveal an automorphism, which is used to
skip branches that are images of already-explored ones.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from scpt.molgraph.smiles import write_smiles

if TYPE_CHECKING:
    from scpt.molgraph.core import Molecule


def _dense_rank(keys: list) -> list[int]:
    distinct = sorted(set(keys))
    index = {k: r for r, k in enumerate(distinct)}
    return [index[k] for k in keys]


def _refine(ranks: list[int], nbrs: list[tuple[tuple[int, int], ...]]) -> list[int]:
    n_classes = len(set(ranks))
    n = len(ranks)
    while n_classes < n:
        keys = [
            (ranks[i], tuple(sorted((ranks[j], bo) for j, bo in nbrs[i])))
            for i in range(n)
        ]
        new = _dense_rank(keys)
        k = max(new) + 1
        if k == n_classes:
            return new
        ranks, n_classes = new, k
    return ranks


def initial_invariants(mol: "Molecule") -> list[tuple]:
    return [
        (a.element, a.charge, mol.degree(i), a.hydrogen_count, a.aromatic)
        for i, a in enumerate(mol.atoms)
    ]


def refined_ranks(mol: "Molecule") -> list[int]:
    """Equivalence-class ranks after refinement (ties not broken)."""
    nbrs = _neighbour_table(mol)
    return _refine(_dense_rank(initial_invariants(mol)), nbrs)


def _neighbour_table(mol: "Molecule"):
    return [
        tuple((j, int(mol.bonds[k].order)) for j, k in mol.neighbors(i))
        for i in range(len(mol.atoms))
    ]


class _Search:
    def __init__(self, mol: "Molecule") -> None:
        self.mol = mol
        self.nbrs = _neighbour_table(mol)
        self.best: tuple[str, list[int]] | None = None
        self.leaves: dict[str, list[int]] = {}
        self.generators: list[list[int]] = []

    def run(self) -> tuple[str, tuple[int, ...]]:
        start = _refine(_dense_rank(initial_invariants(self.mol)), self.nbrs)
        self._visit(start, [])
        smiles, ranks = self.best
        return smiles, tuple(ranks)

    def _visit(self, ranks: list[int], prefix: list[int]) -> None:
        n = len(ranks)
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = [r for r, c in counts.items() if c > 1]
        if not tied:
            self._leaf(ranks)
            return
        target = min(tied)
        cell = [i for i in range(n) if ranks[i] == target]
        explored: list[int] = []
        for atom in cell:
            if explored and self._same_orbit(atom, explored, prefix):
                continue
            explored.append(atom)
            split = [(r, 0 if i == atom else 1) if r == target else (r, 0) for i, r in enumerate(ranks)]
            child = _refine(_dense_rank(split), self.nbrs)
            self._visit(child, prefix + [atom])

    def _leaf(self, ranks: list[int]) -> None:
        smiles, order = write_smiles(self.mol, ranks)
        seen = self.leaves.get(smiles)
        if seen is not None:
            perm = [0] * len(order)
            for a, b in zip(seen, order):
                perm[a] = b
            self.generators.append(perm)
        else:
            self.leaves[smiles] = order
        if self.best is None or smiles < self.best[0]:
            self.best = (smiles, ranks)

    def _same_orbit(self, atom: int, explored: list[int], prefix: list[int]) -> bool:
        gens = [g for g in self.generators if all(g[p] == p for p in prefix)]
        if not gens:
            return False
        parent = list(range(len(self.mol.atoms)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in gens:
            for x, y in enumerate(g):
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
        root = find(atom)
        return any(find(e) == root for e in explored)


def canonical_labeling(mol: "Molecule") -> tuple[str, tuple[int, ...]]:
    """Return (canonical SMILES, canonical rank per atom)."""
    return _Search(mol).run()


def canonicalize(mol: "Molecule") -> str:
    return mol.canonical_form
