"""Molecular graphs: SMILES parsing, ring perception, canonical forms."""

from __future__ import annotations

from scpt.molgraph.canon import canonicalize, refined_ranks
from scpt.molgraph.core import (
    AROMATIC_ORGANIC,
    DUMMY,
    ORGANIC_SUBSET,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    default_hydrogens,
)
from scpt.molgraph.edit import induced_submolecule, random_permutation, remove_atoms
from scpt.molgraph.smiles import parse_components, parse_smiles, to_smiles, write_smiles


def perceive_rings(mol: Molecule) -> list[tuple[int, ...]]:
    """Minimum cycle basis of ``mol`` (computed at construction)."""
    return list(mol.rings)


__all__ = [
    "AROMATIC_ORGANIC",
    "DUMMY",
    "ORGANIC_SUBSET",
    "Atom",
    "Bond",
    "BondOrder",
    "Molecule",
    "canonicalize",
    "default_hydrogens",
    "induced_submolecule",
    "parse_components",
    "parse_smiles",
    "perceive_rings",
    "random_permutation",
    "refined_ranks",
    "remove_atoms",
    "to_smiles",
    "write_smiles",
]
