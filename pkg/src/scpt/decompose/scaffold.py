"""Bemis-Murcko scaffolds: ring systems plus the linkers between them."""

from __future__ import annotations

from dataclasses import dataclass, field

from scpt.molgraph import Molecule, remove_atoms


@dataclass(frozen=True)
class Scaffold:
    canonical_form: str
    molecule: Molecule | None = field(default=None, compare=False, repr=False)

    @property
    def is_empty(self) -> bool:
        return not self.canonical_form


def scaffold_molecule(mol: Molecule) -> Molecule | None:
    """Strip side chains by repeatedly deleting degree-1 atoms.

    Atoms left behind gain hydrogens for the bonds they lost.  Returns None
    for acyclic molecules, whose scaffold is empty.
    """
    if not mol.rings:
        return None
    current = mol
    while True:
        leaves = [i for i in range(len(current.atoms)) if current.degree(i) <= 1]
        if not leaves:
            return current
        current = remove_atoms(current, leaves)


def murcko_scaffold(mol: Molecule) -> Scaffold:
    core = scaffold_molecule(mol)
    if core is None:
        return Scaffold("")
    return Scaffold(core.canonical_form, core)
