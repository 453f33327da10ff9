from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import to_nx
from scpt.errors import WidthMismatch
from scpt.fingerprint import (
    Fingerprint,
    FingerprintCache,
    ecfp,
    ecfp_codes,
    hash_ints,
    read_cache,
    splitmix64,
    tanimoto,
    write_cache,
)
from scpt.molgraph import parse_smiles

Z = {"B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "P": 15, "S": 16, "Cl": 17, "Br": 35, "I": 53}


def reference_codes(mol, radius):
    """Environment codes by direct recursion over each atom's neighbourhood tree.

    Atom invariants are rebuilt from the raw graph (ring bonds found with
    networkx cycle detection) rather than taken from the module.
    """
    g = to_nx(mol)
    ring_edges = {frozenset(e) for cyc in nx.cycle_basis(g) for e in zip(cyc, cyc[1:] + cyc[:1])}

    def invariant(i):
        a = mol.atoms[i]
        in_ring = any(frozenset((i, j)) in ring_edges for j in g.neighbors(i))
        return (Z[a.element], a.charge, g.degree(i), a.hydrogen_count, int(a.aromatic), int(in_ring))

    def code(i, r):
        if r == 0:
            return hash_ints(invariant(i))
        env = sorted((g.edges[i, j]["order"], code(j, r - 1)) for j in g.neighbors(i))
        return hash_ints([r, code(i, r - 1)] + [x for pair in env for x in pair])

    return {code(i, r) for i in range(len(mol.atoms)) for r in range(radius + 1)}


def test_splitmix64_reference_vector():
    # first output of the published SplitMix64 generator from state 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_isomorphic_inputs_same_bits():
    assert ecfp(parse_smiles("CCO")) == ecfp(parse_smiles("OCC"))


def test_radius_zero_ethanol_one_bit_per_atom_invariant():
    # CH3 and CH2 differ in degree and hydrogen count, so CCO has three
    # distinct radius-0 invariants, hence at most three bits
    m = parse_smiles("CCO")
    assert len(ecfp_codes(m, 0)) == 3
    assert ecfp(m, radius=0).popcount <= 3


def test_matches_reference_enumerator(corpus_1k):
    for s in corpus_1k[:100]:
        m = parse_smiles(s)
        assert ecfp_codes(m, 2) == reference_codes(m, 2)
        folded = Fingerprint.from_indices({c % 2048 for c in reference_codes(m, 2)})
        assert ecfp(m) == folded


def test_tanimoto_examples():
    a = Fingerprint.from_indices([1, 2, 3], 64)
    b = Fingerprint.from_indices([2, 3, 4], 64)
    assert tanimoto(a, b) == 0.5
    assert tanimoto(a, a) == 1.0
    empty = Fingerprint(0, 64)
    assert tanimoto(empty, empty) == 1.0
    assert tanimoto(a, empty) == 0.0


def test_width_mismatch():
    with pytest.raises(WidthMismatch):
        tanimoto(Fingerprint(1, 64), Fingerprint(1, 128))


def test_width_validation():
    with pytest.raises(ValueError):
        Fingerprint(0, 100)
    with pytest.raises(ValueError):
        Fingerprint(1 << 64, 64)


@given(st.sets(st.integers(0, 255)), st.sets(st.integers(0, 255)))
def test_tanimoto_set_oracle(a, b):
    fa, fb = Fingerprint.from_indices(a, 256), Fingerprint.from_indices(b, 256)
    expect = 1.0 if not (a | b) else len(a & b) / len(a | b)
    assert tanimoto(fa, fb) == expect
    assert tanimoto(fa, fb) == tanimoto(fb, fa)
    assert set(fa.on_bits()) == a and fa.popcount == len(a)


@given(st.sets(st.integers(0, 127), min_size=1), st.sets(st.integers(0, 127), min_size=1))
def test_tanimoto_one_iff_identical(a, b):
    fa, fb = Fingerprint.from_indices(a, 128), Fingerprint.from_indices(b, 128)
    assert (tanimoto(fa, fb) == 1.0) == (a == b)


def test_wider_folding_never_loses_bits(corpus_1k):
    for s in corpus_1k[:50]:
        m = parse_smiles(s)
        counts = [ecfp(m, 2, w).popcount for w in (64, 256, 1024, 4096)]
        assert counts == sorted(counts)


def test_bytes_round_trip():
    fp = ecfp(parse_smiles("c1ccccc1O"))
    assert Fingerprint.from_bytes(fp.to_bytes(), fp.width, fp.radius) == fp


def test_cache_file_round_trip_and_stable(tmp_path, corpus_1k):
    cache = FingerprintCache()
    for s in corpus_1k[:30]:
        cache.get(parse_smiles(s))
    entries = dict(cache.items())
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    write_cache(p1, entries, 2, 2048)
    write_cache(p2, dict(reversed(list(entries.items()))), 2, 2048)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes()[:4] == b"SCFP"
    back, radius, width = read_cache(p1)
    assert (radius, width) == (2, 2048) and back == entries


def test_cache_rejects_garbage(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"nope")
    with pytest.raises(ValueError):
        read_cache(p)


def test_cache_similarity_matches_direct():
    cache = FingerprintCache()
    a, b = parse_smiles("Cc1ccccc1"), parse_smiles("c1ccccc1")
    assert cache.similarity(a, b) == tanimoto(ecfp(a), ecfp(b))


def test_random_pairs_against_set_oracle():
    rng = random.Random(1)
    for _ in range(200):
        a = set(rng.sample(range(2048), rng.randint(0, 60)))
        b = set(rng.sample(range(2048), rng.randint(0, 60)))
        expect = 1.0 if not (a | b) else len(a & b) / len(a | b)
        assert tanimoto(Fingerprint.from_indices(a), Fingerprint.from_indices(b)) == expect
