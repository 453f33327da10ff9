"""Atoms, bonds and the immutable Molecule graph."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Sequence

from scpt.errors import SmilesError, ValenceError
from scpt.molgraph.rings import find_bridges, minimum_cycle_basis

ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_ORGANIC = frozenset({"B", "C", "N", "O", "P", "S"})
AROMATIC_BRACKET = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})
DUMMY = "*"

VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ATOMIC_NUMBERS: dict[str, int] = {
    "*": 0, "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15, "S": 16,
    "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Ti": 22, "V": 23, "Cr": 24,
    "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29, "Zn": 30, "Ga": 31,
    "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36, "Rb": 37, "Sr": 38,
    "Zr": 40, "Mo": 42, "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47, "Cd": 48,
    "In": 49, "Sn": 50, "Sb": 51, "Te": 52, "I": 53, "Xe": 54, "Cs": 55,
    "Ba": 56, "Gd": 64, "W": 74, "Re": 75, "Os": 76, "Ir": 77, "Pt": 78,
    "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83,
}


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        # aromatic bonds count as 1; the aromatic atom rule adds the extra electron
        return 1 if self is BondOrder.AROMATIC else int(self)


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    charge: int = 0
    aromatic: bool = False
    hydrogen_count: int = 0
    index: int = 0

    @property
    def is_dummy(self) -> bool:
        return self.element == DUMMY

    @property
    def atomic_number(self) -> int:
        return ATOMIC_NUMBERS.get(self.element, 0)


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    in_ring: bool = False

    @property
    def endpoints(self) -> frozenset[int]:
        return frozenset((self.begin, self.end))

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin


def default_hydrogens(element: str, aromatic: bool, bond_sum: int) -> int:
    """Implicit hydrogen count of an unbracketed organic-subset atom.

    ``bond_sum`` counts aromatic bonds as 1.  Aromatic atoms reserve one
    valence unit for the delocalised bond.  Raises ValenceError when the
    bonds alone exceed the largest allowed valence.
    """
    valences = VALENCES[element]
    if bond_sum > valences[-1]:
        raise ValenceError(f"{element} with bond order sum {bond_sum} exceeds valence {valences[-1]}")
    if aromatic:
        return max(0, valences[0] - bond_sum - 1)
    for v in valences:
        if v >= bond_sum:
            return v - bond_sum
    return 0  # unreachable


class Molecule:
    """Immutable attributed molecular graph.

    Atoms are re-indexed on construction; rings (a minimum cycle basis) and
    per-bond ring membership are computed eagerly, the canonical SMILES
    lazily.
    """

    def __init__(
        self,
        atoms: Iterable[Atom],
        bonds: Iterable[Bond],
        *,
        allow_disconnected: bool = False,
    ) -> None:
        atoms = tuple(replace(a, index=i) if a.index != i else a for i, a in enumerate(atoms))
        raw_bonds = list(bonds)
        n = len(atoms)
        if n == 0:
            raise SmilesError("molecule has no atoms")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        seen_pairs: set[frozenset[int]] = set()
        for k, b in enumerate(raw_bonds):
            if b.begin == b.end or not (0 <= b.begin < n and 0 <= b.end < n):
                raise SmilesError(f"bond {k} has invalid endpoints ({b.begin}, {b.end})")
            key = frozenset((b.begin, b.end))
            if key in seen_pairs:
                raise SmilesError(f"duplicate bond between atoms {b.begin} and {b.end}")
            seen_pairs.add(key)
            adj[b.begin].append((b.end, k))
            adj[b.end].append((b.begin, k))

        edges = [(b.begin, b.end) for b in raw_bonds]
        bridges = find_bridges(n, edges)
        self.bonds: tuple[Bond, ...] = tuple(
            b if b.in_ring == (k not in bridges) else replace(b, in_ring=k not in bridges)
            for k, b in enumerate(raw_bonds)
        )
        self.atoms: tuple[Atom, ...] = atoms
        self._adj = tuple(tuple(sorted(row)) for row in adj)
        self.rings: tuple[tuple[int, ...], ...] = tuple(minimum_cycle_basis(n, edges))
        if not allow_disconnected and self.component_count() != 1:
            raise SmilesError("molecule graph is disconnected")

    # -- basic graph queries ----------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """(neighbour atom, bond index) pairs for atom ``i``."""
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        for nbr, k in self._adj[i]:
            if nbr == j:
                return self.bonds[k]
        return None

    def bond_sum(self, i: int) -> int:
        return sum(self.bonds[k].order.valence for _, k in self._adj[i])

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if not a.is_dummy)

    def ring_atoms(self) -> set[int]:
        return {i for r in self.rings for i in r}

    def component_count(self) -> int:
        seen = [False] * len(self.atoms)
        count = 0
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            count += 1
            stack = [start]
            seen[start] = True
            while stack:
                a = stack.pop()
                for nbr, _ in self._adj[a]:
                    if not seen[nbr]:
                        seen[nbr] = True
                        stack.append(nbr)
        return count

    def permute(self, order: Sequence[int]) -> "Molecule":
        """Renumber atoms so that new atom ``i`` is old atom ``order[i]``."""
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        new_index = {old: new for new, old in enumerate(order)}
        atoms = [self.atoms[old] for old in order]
        bonds = [
            Bond(new_index[b.begin], new_index[b.end], b.order)
            for b in self.bonds
        ]
        return Molecule(atoms, bonds, allow_disconnected=True)

    # -- canonical form ---------------------------------------------------

    @cached_property
    def _canonical(self):
        from scpt.molgraph.canon import canonical_labeling

        return canonical_labeling(self)

    @property
    def canonical_form(self) -> str:
        return self._canonical[0]

    @property
    def canonical_ranks(self) -> tuple[int, ...]:
        """Canonical rank of every atom (a permutation of 0..n-1)."""
        return self._canonical[1]

    def __repr__(self) -> str:
        return f"Molecule({self.canonical_form!r})"
