"""Greedy fragment-substitution hill climbing as a non-LLM reference optimizer.

Fitness of a candidate x for source x0 is ``tanimoto(x, x0) + sum_i s_i w_i p_i(x)``.
A move replaces one junction-tree fragment of the current molecule with a
library fragment that has the same number of attachment points; each
external bond is re-attached to one of the new fragment's attachment
points carrying the same bond order.  Reassembled molecules are written out
and parsed again, so anything that fails valence or aromaticity checks is
dropped, and only moves that the fragment edit check classifies as a
single-fragment substitution are kept.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from scpt.decompose import JTNode, dfged_le1, junction_tree
from scpt.errors import OracleMiss, SmilesError
from scpt.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH
from scpt.molgraph import Atom, Bond, Molecule, parse_smiles
from scpt.pipeline.context import MolContext
from scpt.properties import OracleSet, PropertySpec, objective

log = logging.getLogger(__name__)

INFEASIBLE = -math.inf
MAX_ATTACHMENTS = 4  # bijections tried per splice grow as k!


@dataclass(frozen=True)
class LibraryFragment:
    label: str
    attachments: int
    molecule: Molecule = field(repr=False, compare=False)


@dataclass
class FragmentLibrary:
    fragments: list[LibraryFragment] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_count: dict[int, list[LibraryFragment]] = {}
        self._labels: set[str] = set()
        frags, self.fragments = self.fragments, []
        for f in frags:
            self._insert(f)

    def _insert(self, frag: LibraryFragment) -> None:
        if frag.attachments < 1:
            raise ValueError(f"fragment {frag.label!r} has no attachment point")
        if frag.label in self._labels:
            return
        self._labels.add(frag.label)
        self.fragments.append(frag)
        bucket = self._by_count.setdefault(frag.attachments, [])
        bucket.append(frag)
        bucket.sort(key=lambda f: f.label)

    def add(self, label: str) -> None:
        mol = parse_smiles(label, allow_dummy=True)
        canon = mol.canonical_form
        k = sum(1 for a in mol.atoms if a.is_dummy)
        self._insert(LibraryFragment(canon, k, mol))

    def with_attachments(self, k: int) -> list[LibraryFragment]:
        return self._by_count.get(k, [])

    def __len__(self) -> int:
        return len(self.fragments)

    @classmethod
    def from_molecules(cls, mols: Iterable[Molecule]) -> "FragmentLibrary":
        lib = cls()
        for m in mols:
            for node in junction_tree(m).nodes:
                if node.attachments >= 1:
                    lib.add(node.label)
        return lib


# --- fitness --------------------------------------------------------------

def fitness(x: Molecule, x0: Molecule, specs: Sequence[PropertySpec], oracle: OracleSet | MolContext,
            radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> float:
    """Similarity to the source plus the weighted directional property sum.

    A molecule the oracle cannot score gets ``-inf``.
    """
    ctx = oracle if isinstance(oracle, MolContext) else MolContext(oracle, radius, width)
    try:
        prof = ctx.profile(x)
    except OracleMiss:
        return INFEASIBLE
    return ctx.similarity(x, x0) + objective(specs, prof)


# --- moves ----------------------------------------------------------------

def _externals(mol: Molecule, node: JTNode) -> list[tuple[int, int, object]] | None:
    """(inside atom, outside atom, order) for each bond leaving the fragment."""
    inside, inner = set(node.atoms), set(node.bonds)
    out = []
    for u in node.atoms:
        for v, k in mol.neighbors(u):
            if k in inner:
                continue
            if v in inside:
                return None  # a non-fragment bond between fragment atoms; not spliceable
            out.append((u, v, mol.bonds[k].order))
    return out


def _ports(frag: Molecule) -> list[tuple[int, object]]:
    """(anchor atom, order) for each dummy of a library fragment."""
    ports = []
    for i, a in enumerate(frag.atoms):
        if a.is_dummy:
            (anchor, k), = frag.neighbors(i)
            ports.append((anchor, frag.bonds[k].order))
    return ports


def splice(mol: Molecule, node: JTNode, frag: Molecule, assignment: Sequence[int]) -> Molecule | None:
    """Replace ``node``'s atoms by ``frag``; external bond i goes to frag port ``assignment[i]``.

    Returns the re-parsed molecule, or None when the reassembly is invalid.
    """
    ext = _externals(mol, node)
    ports = _ports(frag)
    if ext is None or len(ext) != len(ports):
        return None
    for (_, _, order), j in zip(ext, assignment):
        if ports[j][1] != order:
            return None
    drop = set(node.atoms)
    keep = [i for i in range(len(mol.atoms)) if i not in drop]
    remap = {old: new for new, old in enumerate(keep)}
    atoms = [mol.atoms[i] for i in keep]
    fmap = {}
    for j, a in enumerate(frag.atoms):
        if not a.is_dummy:
            fmap[j] = len(atoms)
            atoms.append(Atom(a.element, a.charge, a.aromatic, a.hydrogen_count))
    bonds = [Bond(remap[b.begin], remap[b.end], b.order) for b in mol.bonds
             if b.begin in remap and b.end in remap]
    bonds += [Bond(fmap[b.begin], fmap[b.end], b.order) for b in frag.bonds
              if b.begin in fmap and b.end in fmap]
    for (_, v, order), j in zip(ext, assignment):
        bonds.append(Bond(remap[v], fmap[ports[j][0]], order))
    try:
        text = Molecule(atoms, bonds).canonical_form
        return parse_smiles(text)
    except (SmilesError, ValueError) as exc:
        log.debug("discarded splice: %s", exc)
        return None


def neighbors(x: Molecule, lib: FragmentLibrary, max_moves: int = 200) -> list[Molecule]:
    """Single-fragment substitutions of ``x``, sorted by canonical form, at most ``max_moves``."""
    if max_moves <= 0 or not len(lib):
        return []
    jt = junction_tree(x)
    found: dict[str, Molecule] = {}
    for node in jt.nodes:
        k = node.attachments
        if k < 1 or k > MAX_ATTACHMENTS:
            continue
        for frag in lib.with_attachments(k):
            if frag.label == node.label:
                continue
            seen_here: set[str] = set()
            for perm in itertools.permutations(range(k)):
                cand = splice(x, node, frag.molecule, perm)
                if cand is None:
                    continue
                key = cand.canonical_form
                if key in seen_here or key in found or key == x.canonical_form:
                    continue
                seen_here.add(key)
                verdict = dfged_le1(jt, junction_tree(cand))
                if verdict.distance == 1 and verdict.is_single_fragment:
                    found[key] = cand
    return [found[k] for k in sorted(found)[:max_moves]]


# --- search ---------------------------------------------------------------

@dataclass
class TraceRow:
    step: int
    smiles: str
    fitness: float
    sim: float


@dataclass
class SearchState:
    current: Molecule
    source: Molecule
    fitness: float
    step: int = 0
    rng_seed: int = 0


@dataclass
class SearchResult:
    best: Molecule
    fitness: float
    sim: float
    trace: list[TraceRow]
    stopped: str  # "budget" or "local_optimum"


def hill_climb(x0: Molecule, lib: FragmentLibrary, specs: Sequence[PropertySpec], oracle: OracleSet | MolContext,
               budget: int = 10, seed: int = 0, max_moves: int = 200) -> SearchResult:
    """Best-improvement climbing; ``budget`` bounds the number of accepted moves.

    Ties between equally fit best neighbours are broken with a generator
    seeded by ``seed``; a move is taken only if it strictly raises fitness.
    """
    ctx = oracle if isinstance(oracle, MolContext) else MolContext(oracle)
    rng = random.Random(seed)
    f0 = fitness(x0, x0, specs, ctx)
    state = SearchState(x0, x0, f0, 0, seed)
    trace = [TraceRow(0, x0.canonical_form, f0, ctx.similarity(x0, x0))]
    stopped = "budget"
    while state.step < budget:
        scored = [(fitness(n, x0, specs, ctx), n) for n in neighbors(state.current, lib, max_moves)]
        scored = [(f, n) for f, n in scored if f > state.fitness]
        if not scored:
            stopped = "local_optimum"
            break
        top = max(f for f, _ in scored)
        tied = [n for f, n in scored if f == top]
        choice = tied[0] if len(tied) == 1 else rng.choice(tied)
        state = SearchState(choice, x0, top, state.step + 1, seed)
        trace.append(TraceRow(state.step, choice.canonical_form, top, ctx.similarity(choice, x0)))
    return SearchResult(state.current, state.fitness, trace[-1].sim, trace, stopped)


def write_trace(trace: Sequence[TraceRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step\tsmiles\tfitness\tsim\n")
        for r in trace:
            fh.write(f"{r.step}\t{r.smiles}\t{r.fitness!r}\t{r.sim!r}\n")
