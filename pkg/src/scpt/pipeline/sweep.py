"""Similarity-bin and gap-bin sweeps over mined pairs.

Both axes start from property-filtered pairs annotated with similarity.

* ``sim`` axis: each bin is a similarity window.  Rows report the raw
  survivors (count, mean similarity, mean gain) and a sample of
  ``per_bin_sample`` pairs whose gain distribution is matched, by stratified
  sampling, to the gains of the highest-similarity bin.
* ``gap`` axis: similarity is fixed to one window; each bin is a range of
  gain percentiles counted from the top (bin [0, 0.1) holds the largest 10%
  of gains).  Rows report survivors and a uniform sample.

A bin that cannot fill its sample is flagged (``insufficient``) rather than
failing the sweep.
"""

from __future__ import annotations

import math
import random
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from scpt.errors import InsufficientPairs
from scpt.molgraph import Molecule
from scpt.pipeline.context import MolContext
from scpt.pipeline.stages import filter_property, filter_structure, mine_pairs
from scpt.pipeline.types import CandidatePair
from scpt.properties import PropertySpec

SIM_BINS: tuple[tuple[float, float], ...] = (
    (0.3, 0.4), (0.4, 0.5), (0.5, 0.6), (0.6, 0.7), (0.7, 0.8), (0.8, 0.9),
)
GAP_BINS: tuple[tuple[float, float], ...] = tuple((i / 10, (i + 1) / 10) for i in range(9))
GAP_WINDOW = (0.7, 0.8)
STRATA = 10


@dataclass
class SweepRow:
    label: str
    lo: float
    hi: float
    available: int
    mean_sim: float | None
    mean_gain: float | None
    sampled: int
    sample_mean_sim: float | None
    sample_mean_gain: float | None
    insufficient: bool = False
    note: str = ""


@dataclass
class SweepReport:
    axis: str
    rows: list[SweepRow]
    pairs_considered: int
    counters: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "pairs_considered": self.pairs_considered,
            "counters": dict(sorted(self.counters.items())),
            "warnings": list(self.warnings),
            "rows": [asdict(r) for r in self.rows],
        }


def _mean(xs: Sequence[float]) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


def _label(lo: float, hi: float) -> str:
    return f"{lo:.1f}-{hi:.1f}"


def _strata_edges(template: Sequence[float], strata: int) -> list[float]:
    """Interior quantile cut points of the template gain distribution."""
    if len(template) < 2:
        return []
    cuts = statistics.quantiles(template, n=strata, method="inclusive")
    return sorted(set(cuts))


def _stratum(x: float, edges: Sequence[float]) -> int:
    k = 0
    while k < len(edges) and x >= edges[k]:
        k += 1
    return k


def stratified_sample(pairs: list[CandidatePair], template: Sequence[float], n: int,
                      rng: random.Random, strata: int = STRATA) -> tuple[list[CandidatePair], bool]:
    """Sample ``n`` pairs whose gain strata follow the template's proportions.

    Returns (sample, filled); ``filled`` is False when some stratum ran short.
    """
    edges = _strata_edges(template, strata)
    n_strata = len(edges) + 1
    share = Counter(_stratum(g, edges) for g in template)
    total = sum(share.values()) or 1
    # largest-remainder apportionment of n across strata
    raw = [n * share[k] / total for k in range(n_strata)]
    quota = [int(math.floor(r)) for r in raw]
    for k in sorted(range(n_strata), key=lambda k: (-(raw[k] - quota[k]), k))[: n - sum(quota)]:
        quota[k] += 1
    buckets: dict[int, list[CandidatePair]] = {}
    for p in pairs:
        buckets.setdefault(_stratum(p.gain, edges), []).append(p)
    out: list[CandidatePair] = []
    filled = True
    for k in range(n_strata):
        pool = buckets.get(k, [])
        if len(pool) < quota[k]:
            filled = False
            out.extend(pool)
        else:
            out.extend(rng.sample(pool, quota[k]))
    return sorted(out, key=lambda p: p.key), filled


def sweep(corpus: Sequence[Molecule], specs: Sequence[PropertySpec], ctx: MolContext, *,
          axis: str = "sim", bins: Sequence[tuple[float, float]] | None = None,
          per_bin_sample: int = 100, seed: int = 0, delta: float | None = None,
          strategy: str = "scaffold", all_pairs_limit: int = 2000,
          structure: bool = False, gamma_mcs: float = 0.9, mcs_budget: int = 1_000_000,
          gap_window: tuple[float, float] = GAP_WINDOW, strata: int = STRATA) -> SweepReport:
    """Run the property stage once, then bin the survivors along ``axis``."""
    if axis not in ("sim", "gap"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    if per_bin_sample < 0:
        raise ValueError("per_bin_sample must be >= 0")
    counters: Counter = Counter()
    if delta is None:
        delta = specs[0].threshold if len(specs) == 1 else 0.0
    mined = list(mine_pairs(corpus, ctx, strategy, all_pairs_limit))
    counters["mined"] = len(mined)
    prop = filter_property(mined, specs, delta, len(specs) > 1, ctx, counters)
    counters["property"] = len(prop)
    annotated = [p.passed("similarity", sim=ctx.similarity(p.source, p.target)) for p in prop]
    if structure:
        annotated = filter_structure(annotated, gamma_mcs, mcs_budget, ctx, counters=counters)
        counters["structure"] = len(annotated)

    rows: list[SweepRow] = []
    warnings: list[str] = []
    if axis == "sim":
        bins = list(bins or SIM_BINS)
        members = [[p for p in annotated if lo <= p.sim < hi] for lo, hi in bins]
        template = [p.gain for p in members[-1]]
        for (lo, hi), pool in zip(bins, members):
            label = _label(lo, hi)
            rng = random.Random(f"{seed}:sim:{label}")
            sample, filled = stratified_sample(pool, template, per_bin_sample, rng, strata) if template \
                else (sorted(rng.sample(pool, min(per_bin_sample, len(pool))), key=lambda p: p.key),
                      len(pool) >= per_bin_sample)
            rows.append(_row(label, lo, hi, pool, sample, filled, per_bin_sample, warnings))
    else:
        bins = list(bins or GAP_BINS)
        lo_w, hi_w = gap_window
        window = [p for p in annotated if lo_w <= p.sim < hi_w]
        ranked = sorted(window, key=lambda p: (-p.gain, p.key))
        n = len(ranked)
        for lo, hi in bins:
            label = _label(lo, hi)
            pool = ranked[math.floor(lo * n + 1e-9): math.floor(hi * n + 1e-9)]
            rng = random.Random(f"{seed}:gap:{label}")
            take = min(per_bin_sample, len(pool))
            sample = sorted(rng.sample(pool, take), key=lambda p: p.key)
            rows.append(_row(label, lo, hi, pool, sample, len(pool) >= per_bin_sample,
                             per_bin_sample, warnings))
    return SweepReport(axis, rows, len(annotated), dict(counters), warnings)


def _row(label, lo, hi, pool, sample, filled, wanted, warnings) -> SweepRow:
    note = ""
    if not filled:
        note = str(InsufficientPairs(label, len(sample), wanted))
        warnings.append(note)
    return SweepRow(
        label, lo, hi, len(pool),
        _mean([p.sim for p in pool]), _mean([p.gain for p in pool]),
        len(sample), _mean([p.sim for p in sample]), _mean([p.gain for p in sample]),
        not filled, note,
    )
