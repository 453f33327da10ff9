"""Graph edits that return new Molecules: deletion, sub-graph extraction, joining."""

from __future__ import annotations

import random
from typing import Iterable

from scpt.molgraph.core import DUMMY, Atom, Bond, BondOrder, Molecule


def remove_atoms(mol: Molecule, drop: Iterable[int]) -> Molecule:
    """Delete atoms, capping each broken bond on the survivor with hydrogens."""
    drop = set(drop)
    keep = [i for i in range(len(mol.atoms)) if i not in drop]
    if not keep:
        raise ValueError("cannot remove every atom")
    extra_h = [0] * len(mol.atoms)
    for b in mol.bonds:
        for here, there in ((b.begin, b.end), (b.end, b.begin)):
            if here not in drop and there in drop:
                atom = mol.atoms[here]
                extra_h[here] += 1 if atom.aromatic else b.order.valence
    remap = {old: new for new, old in enumerate(keep)}
    atoms = []
    for i in keep:
        a = mol.atoms[i]
        h = a.hydrogen_count + (extra_h[i] if not a.is_dummy else 0)
        atoms.append(Atom(a.element, a.charge, a.aromatic, h))
    bonds = [
        Bond(remap[b.begin], remap[b.end], b.order)
        for b in mol.bonds
        if b.begin in remap and b.end in remap
    ]
    return Molecule(atoms, bonds, allow_disconnected=True)


def induced_submolecule(
    mol: Molecule,
    atoms: Iterable[int],
    bonds: Iterable[int] | None = None,
    *,
    placeholders: bool = True,
) -> Molecule:
    """Extract a fragment.

    ``bonds`` restricts the fragment's internal bonds (default: all bonds
    among ``atoms``).  With ``placeholders`` every bond leaving the fragment
    is kept, ending on a ``*`` dummy atom, so fragment atoms keep their
    valence and hydrogen counts.
    """
    atoms = sorted(set(atoms))
    remap = {old: new for new, old in enumerate(atoms)}
    if bonds is None:
        inner = {k for k, b in enumerate(mol.bonds) if b.begin in remap and b.end in remap}
    else:
        inner = set(bonds)
    out_atoms = [
        Atom(mol.atoms[i].element, mol.atoms[i].charge, mol.atoms[i].aromatic,
             mol.atoms[i].hydrogen_count)
        for i in atoms
    ]
    out_bonds = [Bond(remap[mol.bonds[k].begin], remap[mol.bonds[k].end], mol.bonds[k].order)
                 for k in sorted(inner)]
    if placeholders:
        for i in atoms:
            for _, k in mol.neighbors(i):
                if k in inner:
                    continue
                out_atoms.append(Atom(DUMMY))
                out_bonds.append(Bond(remap[i], len(out_atoms) - 1, mol.bonds[k].order))
    return Molecule(out_atoms, out_bonds, allow_disconnected=not placeholders)


def join(a: Molecule, a_atom: int, b: Molecule, b_dummy: int) -> Molecule:
    """Attach ``b`` to atom ``a_atom`` of ``a`` through ``b``'s dummy atom.

    The dummy is removed; the bond it carried is re-created between
    ``a_atom`` and the dummy's neighbour, consuming hydrogens on ``a_atom``.
    """
    if not b.atoms[b_dummy].is_dummy or b.degree(b_dummy) != 1:
        raise ValueError("b_dummy must be a dummy atom with one bond")
    (anchor, k), = b.neighbors(b_dummy)
    order = b.bonds[k].order
    host = a.atoms[a_atom]
    cost = order.valence
    if host.hydrogen_count < cost:
        raise ValueError(f"atom {a_atom} has no free hydrogens for a {order.name} bond")
    atoms = [Atom(x.element, x.charge, x.aromatic,
                  x.hydrogen_count - (cost if i == a_atom else 0)) for i, x in enumerate(a.atoms)]
    offset = len(atoms)
    remap = {}
    for i, x in enumerate(b.atoms):
        if i == b_dummy:
            continue
        remap[i] = offset + len(remap)
        atoms.append(Atom(x.element, x.charge, x.aromatic, x.hydrogen_count))
    bonds = [Bond(x.begin, x.end, x.order) for x in a.bonds]
    for x in b.bonds:
        if b_dummy in (x.begin, x.end):
            continue
        bonds.append(Bond(remap[x.begin], remap[x.end], x.order))
    bond_order = order if order is not BondOrder.AROMATIC else BondOrder.SINGLE
    bonds.append(Bond(a_atom, remap[anchor], bond_order))
    return Molecule(atoms, bonds)


def random_permutation(mol: Molecule, rng: random.Random) -> Molecule:
    order = list(range(len(mol.atoms)))
    rng.shuffle(order)
    return mol.permute(order)
