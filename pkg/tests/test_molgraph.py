from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import isomorphic
from scpt.errors import SmilesSyntaxError, UnsupportedFeature, ValenceError
from scpt.molgraph import (
    Atom,
    Bond,
    BondOrder,
    Molecule,
    parse_components,
    parse_smiles,
    perceive_rings,
    random_permutation,
    remove_atoms,
)
from scpt.molgraph.edit import induced_submolecule, join

TRICKY = [
    "CCO", "c1ccccc1", "C1CC1C", "C1CC2CCC12", "OC(=O)c1ccccc1", "c1ccc2ccccc2c1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "C[N+](=O)[O-]", "c1ccc2[nH]ccc2c1", "C1CCC2(CC1)CCC2",
    "CC(C)(C)c1ccc(O)cc1", "N#Cc1ccncc1", "FC(F)(F)c1ccsc1", "O=C1CCCCN1", "C=CC=O",
]


# --- parsing ------------------------------------------------------------------

def test_ethanol():
    m = parse_smiles("CCO")
    assert [a.element for a in m.atoms] == ["C", "C", "O"]
    assert len(m.bonds) == 2 and m.rings == ()
    assert [a.hydrogen_count for a in m.atoms] == [3, 2, 1]


def test_benzene():
    m = parse_smiles("c1ccccc1")
    assert len(m.atoms) == 6 and all(a.aromatic for a in m.atoms)
    assert [len(r) for r in m.rings] == [6]
    assert all(b.in_ring for b in m.bonds)


def test_methylcyclopropane_euler():
    m = parse_smiles("C1CC1C")
    assert (len(m.atoms), len(m.bonds)) == (4, 4)
    assert [len(r) for r in perceive_rings(m)] == [3]
    assert sum(b.in_ring for b in m.bonds) == 3


def test_bicyclic_basis():
    m = parse_smiles("C1CC2CCC12")
    assert len(perceive_rings(m)) == len(m.bonds) - len(m.atoms) + 1 == 2


def test_acyclic_has_no_rings():
    assert perceive_rings(parse_smiles("CCO")) == []


def test_percent_ring_closure_and_stereo_dropped():
    assert parse_smiles("C%10CC%10").canonical_form == parse_smiles("C1CC1").canonical_form
    assert parse_smiles("C[C@H](N)O").canonical_form == parse_smiles("CC(N)O").canonical_form
    assert parse_smiles("F/C=C/F").canonical_form == parse_smiles("FC=CF").canonical_form


def test_bracket_atoms():
    m = parse_smiles("[NH4+]")
    assert m.atoms[0].charge == 1 and m.atoms[0].hydrogen_count == 4
    nitro = parse_smiles("C[N+](=O)[O-]")
    assert sorted(a.charge for a in nitro.atoms) == [-1, 0, 0, 1]


def test_kekule_input_normalized_to_aromatic():
    assert parse_smiles("C1=CC=CC=C1").canonical_form == parse_smiles("c1ccccc1").canonical_form


@pytest.mark.parametrize("text,err", [
    ("C(C", SmilesSyntaxError), ("C)", SmilesSyntaxError), ("C1CC", SmilesSyntaxError),
    ("", SmilesSyntaxError), ("[13CH4]", UnsupportedFeature), ("*C", UnsupportedFeature),
    ("C.C", UnsupportedFeature), ("[Xx]", UnsupportedFeature), ("CC(C)(C)(C)C", ValenceError),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_smiles(text)


def test_components_split():
    parts = parse_components("CC.O")
    assert [p.canonical_form for p in parts] == ["CC", "O"]


def test_molecule_rejects_bad_graphs():
    atoms = [Atom("C", hydrogen_count=4), Atom("C", hydrogen_count=4)]
    with pytest.raises(ValueError):
        Molecule(atoms, [])  # disconnected
    with pytest.raises(ValueError):
        Molecule(atoms, [Bond(0, 0, BondOrder.SINGLE)])
    with pytest.raises(ValueError):
        Molecule(atoms, [Bond(0, 1, BondOrder.SINGLE), Bond(1, 0, BondOrder.SINGLE)])


# --- canonical form -------------------------------------------------------------

def test_reversed_traversal_same_form():
    assert parse_smiles("OCC").canonical_form == parse_smiles("CCO").canonical_form


def test_canonical_idempotent():
    once = parse_smiles("c1ccccc1").canonical_form
    assert parse_smiles(once).canonical_form == once


@pytest.mark.parametrize("smiles", TRICKY)
def test_round_trip_isomorphic(smiles):
    m = parse_smiles(smiles)
    assert isomorphic(parse_smiles(m.canonical_form), m)


def test_500_permutations_of_12_atom_molecule():
    m = parse_smiles("CC(C)(C)c1ccc(O)cc1C")
    assert len(m.atoms) == 12
    rng = random.Random(0)
    forms = {random_permutation(m, rng).canonical_form for _ in range(500)}
    assert forms == {m.canonical_form}


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(TRICKY) - 1), seed=st.integers(0, 2**32 - 1))
def test_canonical_invariant_under_renumbering(idx, seed):
    m = parse_smiles(TRICKY[idx])
    p = random_permutation(m, random.Random(seed))
    assert p.canonical_form == m.canonical_form
    assert isomorphic(p, m)


def test_ring_count_equals_cyclomatic_number(corpus_1k):
    for s in corpus_1k[:200]:
        m = parse_smiles(s)
        assert len(m.rings) == len(m.bonds) - len(m.atoms) + 1


# --- edits ----------------------------------------------------------------------

def test_remove_atoms_caps_with_hydrogens():
    m = remove_atoms(parse_smiles("CCO"), [2])
    assert m.canonical_form == "CC"
    assert [a.hydrogen_count for a in m.atoms] == [3, 3]


def test_induced_submolecule_has_placeholders():
    m = parse_smiles("CCO")
    frag = induced_submolecule(m, [1, 2])
    assert frag.canonical_form == parse_smiles("[*]CO", allow_dummy=True).canonical_form


def test_join_attaches_through_dummy():
    ring = parse_smiles("c1ccccc1")
    sub = parse_smiles("[*]C", allow_dummy=True)
    dummy = next(i for i, a in enumerate(sub.atoms) if a.is_dummy)
    assert join(ring, 0, sub, dummy).canonical_form == parse_smiles("Cc1ccccc1").canonical_form
