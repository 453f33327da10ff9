"""Maximum common connected induced subgraph (McSplit-style branch and bound).

Atoms match when (element, aromatic) agree.  Mapped atom pairs must agree
on every bond among them, including the absence of a bond, so the common
part is an induced subgraph of both molecules.  Unmatched atoms are kept in
label classes: two unmatched atoms share a class when they have the same
atom label and the same bond order to every already-matched atom.  The
bound is the match size plus, per class, the smaller side count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scpt.molgraph import Molecule

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class MCSResult:
    ratio: float
    size: int
    exhausted: bool  # budget ran out before the search finished
    mapping: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    @property
    def exact(self) -> bool:
        return not self.exhausted


class _BudgetExhausted(Exception):
    pass


class _Done(Exception):
    pass


def _atom_labels(mol: Molecule) -> list[tuple[str, bool]]:
    return [(a.element, a.aromatic) for a in mol.atoms]


def _bond_matrix(mol: Molecule) -> list[list[int]]:
    n = len(mol.atoms)
    m = [[0] * n for _ in range(n)]
    for b in mol.bonds:
        m[b.begin][b.end] = m[b.end][b.begin] = int(b.order)
    return m


class _McSplit:
    def __init__(self, a: Molecule, b: Molecule, budget: int, need: int, stop_at: int) -> None:
        self.la, self.lb = _atom_labels(a), _atom_labels(b)
        self.ma, self.mb = _bond_matrix(a), _bond_matrix(b)
        self.budget = budget
        self.expansions = 0
        self.need = need  # only solutions of at least this size matter
        self.stop_at = stop_at  # stop as soon as a solution this large exists
        self.best: list[tuple[int, int]] = []
        self.deg_a = [sum(1 for x in row if x) for row in self.ma]

    def run(self) -> None:
        groups: dict[tuple, tuple[list[int], list[int]]] = {}
        for v, lab in enumerate(self.la):
            groups.setdefault(lab, ([], []))[0].append(v)
        for w, lab in enumerate(self.lb):
            if lab in groups:
                groups[lab][1].append(w)
        classes = [(l, r, False) for l, r in groups.values() if r]
        try:
            self._search(classes, [])
        except _Done:
            pass

    def _bound(self, classes, size: int) -> int:
        return size + sum(min(len(l), len(r)) for l, r, _ in classes)

    def _search(self, classes, mapping: list[tuple[int, int]]) -> None:
        self.expansions += 1
        if self.expansions > self.budget:
            raise _BudgetExhausted
        if len(mapping) > len(self.best):
            self.best = list(mapping)
            if len(self.best) >= self.stop_at:
                raise _Done
        bound = self._bound(classes, len(mapping))
        if bound <= len(self.best) or bound < self.need:
            return
        # connected growth: after the first pair only classes touching the match
        eligible = [c for c in classes if c[2] or not mapping]
        if not eligible:
            return
        left, right, adj = min(eligible, key=lambda c: (max(len(c[0]), len(c[1])), c[0][0]))
        v = max(left, key=lambda x: (self.deg_a[x], -x))
        rest_left = [x for x in left if x != v]
        for w in sorted(right):
            new_classes = []
            for l, r, touched in classes:
                l2 = [x for x in l if x != v]
                r2 = [y for y in r if y != w]
                buckets: dict[int, tuple[list[int], list[int]]] = {}
                for x in l2:
                    buckets.setdefault(self.ma[v][x], ([], []))[0].append(x)
                for y in r2:
                    key = self.mb[w][y]
                    if key in buckets:
                        buckets[key][1].append(y)
                for key, (bl, br) in buckets.items():
                    if bl and br:
                        new_classes.append((bl, br, touched or key != 0))
            mapping.append((v, w))
            self._search(new_classes, mapping)
            mapping.pop()
            if self._bound(classes, len(mapping)) <= len(self.best):
                return
        # branch where v stays unmatched
        shrunk = []
        for l, r, touched in classes:
            if l is left:
                if rest_left:
                    shrunk.append((rest_left, r, touched))
            else:
                shrunk.append((l, r, touched))
        self._search(shrunk, mapping)


def mcs_ratio(a: Molecule, b: Molecule, budget: int = DEFAULT_BUDGET,
              threshold: float | None = None) -> MCSResult:
    """|MCS(a, b)| / max(|a|, |b|) over heavy atoms.

    With ``threshold`` the search only looks for a common subgraph reaching
    that ratio: branches that cannot reach it are pruned and the search stops
    once it is reached.  The returned ratio is then a lower bound that is
    exact only as a decision against the threshold.  On budget exhaustion the
    best size found so far is returned with ``exhausted`` set.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    denom = max(len(a.atoms), len(b.atoms))
    need, stop_at = 0, min(len(a.atoms), len(b.atoms))
    if threshold is not None:
        need = max(1, math.ceil(threshold * denom - 1e-9))
        stop_at = min(stop_at, need)
    solver = _McSplit(a, b, budget, need, stop_at)
    exhausted = False
    try:
        solver.run()
    except _BudgetExhausted:
        exhausted = True
    size = len(solver.best)
    return MCSResult(size / denom, size, exhausted, tuple(sorted(solver.best)))
