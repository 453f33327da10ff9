"""Per-run memo of derived molecule data, keyed by canonical form."""

from __future__ import annotations

from scpt.decompose import JunctionTree, Scaffold, junction_tree, murcko_scaffold
from scpt.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH, Fingerprint, FingerprintCache
from scpt.molgraph import Molecule
from scpt.properties import OracleSet, OracleSource


class MolContext:
    """Caches fingerprints, scaffolds, junction trees and property profiles."""

    def __init__(self, oracles: OracleSet | list[OracleSource] | None = None,
                 radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> None:
        if oracles is None:
            oracles = OracleSet([])
        elif not isinstance(oracles, OracleSet):
            oracles = OracleSet(oracles)
        self.oracles = oracles
        self.fingerprints = FingerprintCache(radius, width)
        self._scaffolds: dict[str, Scaffold] = {}
        self._trees: dict[str, JunctionTree] = {}

    def fp(self, mol: Molecule) -> Fingerprint:
        return self.fingerprints.get(mol)

    def similarity(self, a: Molecule, b: Molecule) -> float:
        return self.fingerprints.similarity(a, b)

    def scaffold(self, mol: Molecule) -> Scaffold:
        key = mol.canonical_form
        hit = self._scaffolds.get(key)
        if hit is None:
            hit = self._scaffolds[key] = murcko_scaffold(mol)
        return hit

    def jt(self, mol: Molecule) -> JunctionTree:
        key = mol.canonical_form
        hit = self._trees.get(key)
        if hit is None:
            hit = self._trees[key] = junction_tree(mol)
        return hit

    def profile(self, mol: Molecule) -> dict[str, float]:
        return self.oracles.profile(mol)
