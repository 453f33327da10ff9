"""Pair mining and the three filter stages: property, similarity, structure.

Every stage returns pairs sorted by (source, target) canonical form, so
output order never depends on scheduling.
"""

from __future__ import annotations

import logging
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Iterator, Sequence

from scpt.decompose import dfged_le1, junction_tree, mcs_ratio
from scpt.errors import CorpusTooLarge, OracleMiss
from scpt.molgraph import Molecule, parse_smiles
from scpt.pipeline.context import MolContext
from scpt.pipeline.types import DEFAULT_ALL_PAIRS_LIMIT, CandidatePair, SimilarityMode
from scpt.properties import PropertySpec, all_better, delta_p, reaches

log = logging.getLogger(__name__)


def _dedupe(corpus: Iterable[Molecule]) -> list[Molecule]:
    seen: dict[str, Molecule] = {}
    for m in corpus:
        seen.setdefault(m.canonical_form, m)
    return [seen[k] for k in sorted(seen)]


def mine_pairs(corpus: Sequence[Molecule], ctx: MolContext, strategy: str = "scaffold",
               limit: int = DEFAULT_ALL_PAIRS_LIMIT) -> Iterator[CandidatePair]:
    """Ordered pairs within each scaffold group, or every ordered pair.

    "all" is meant for small corpora and refuses corpora above ``limit``.
    """
    mols = _dedupe(corpus)
    if strategy == "all":
        if len(mols) > limit:
            raise CorpusTooLarge(f"all-pairs mining over {len(mols)} molecules exceeds limit {limit}")
        groups = [mols]
    elif strategy == "scaffold":
        by_scaffold: dict[str, list[Molecule]] = {}
        for m in mols:
            by_scaffold.setdefault(ctx.scaffold(m).canonical_form, []).append(m)
        groups = [by_scaffold[k] for k in sorted(by_scaffold)]
    else:
        raise ValueError(f"unknown mining strategy {strategy!r}")
    # sort across groups too, so the stream is in global canonical order
    pairs = [(s, t) for g in groups for s in g for t in g if s is not t]
    pairs.sort(key=lambda p: (p[0].canonical_form, p[1].canonical_form))
    for s, t in pairs:
        yield CandidatePair(s, t)


def _sorted(pairs: Iterable[CandidatePair]) -> list[CandidatePair]:
    return sorted(pairs, key=lambda p: p.key)


def filter_property(pairs: Iterable[CandidatePair], specs: Sequence[PropertySpec], delta: float,
                    all_better_flag: bool, ctx: MolContext, counters: Counter | None = None,
                    upper_half: bool = False) -> list[CandidatePair]:
    """Keep pairs with gain >= delta (and every property improving by its
    threshold when ``all_better_flag``).  Pairs with a missing oracle value
    are dropped and counted as ``oracle_miss``.

    ``upper_half`` additionally keeps only pairs whose gain reaches the
    median gain of the survivors.
    """
    counters = counters if counters is not None else Counter()
    kept = []
    for p in pairs:
        try:
            ps, pt = ctx.profile(p.source), ctx.profile(p.target)
        except OracleMiss:
            counters["oracle_miss"] += 1
            continue
        gain = delta_p(specs, ps, pt)
        if not reaches(gain, delta):
            continue
        if all_better_flag and not all_better(specs, ps, pt):
            continue
        kept.append(p.passed("property", gain=gain))
    if upper_half and kept:
        median = statistics.median(p.gain for p in kept)
        counters["upper_half_dropped"] += sum(1 for p in kept if p.gain < median)
        kept = [p for p in kept if p.gain >= median]
    return _sorted(kept)


def filter_similarity(pairs: Iterable[CandidatePair], mode: SimilarityMode, ctx: MolContext) -> list[CandidatePair]:
    kept = []
    for p in pairs:
        sim = ctx.similarity(p.source, p.target)
        if mode.accepts(sim):
            kept.append(p.passed("similarity", sim=sim))
    return _sorted(kept)


def structure_check(source: Molecule, target: Molecule, gamma_mcs: float, budget: int,
                    strict: bool = True, ctx: MolContext | None = None) -> tuple[bool, str]:
    """(passes, reason) for the single-fragment + MCS test."""
    ja = ctx.jt(source) if ctx else junction_tree(source)
    jb = ctx.jt(target) if ctx else junction_tree(target)
    verdict = dfged_le1(ja, jb, strict=strict)
    if not verdict.is_single_fragment:
        return False, "not_single_fragment"
    result = mcs_ratio(source, target, budget, threshold=gamma_mcs)
    if result.exhausted:
        return False, "mcs_budget_exhausted"
    if result.ratio < gamma_mcs:
        return False, "mcs_below_threshold"
    return True, "ok"


def _structure_worker(args: tuple[str, str, float, int, bool]) -> tuple[bool, str]:
    src, tgt, gamma_mcs, budget, strict = args
    return structure_check(parse_smiles(src), parse_smiles(tgt), gamma_mcs, budget, strict)


def filter_structure(pairs: Iterable[CandidatePair], gamma_mcs: float, budget: int, ctx: MolContext,
                     strict: bool = True, counters: Counter | None = None, jobs: int = 1) -> list[CandidatePair]:
    """Keep single-fragment substitutions whose MCS ratio reaches ``gamma_mcs``.

    Pairs whose MCS search runs out of budget are dropped and counted.
    """
    counters = counters if counters is not None else Counter()
    pairs = _sorted(pairs)
    if jobs > 1 and len(pairs) > 1:
        args = [(p.key[0], p.key[1], gamma_mcs, budget, strict) for p in pairs]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(_structure_worker, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        verdicts = [structure_check(p.source, p.target, gamma_mcs, budget, strict, ctx) for p in pairs]
    kept = []
    for p, (ok, reason) in zip(pairs, verdicts):
        if ok:
            kept.append(p.passed("structure"))
        else:
            counters[reason] += 1
    return kept
