"""End-to-end curation: mine, filter, group into triplets, report."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from scpt.molgraph import Molecule
from scpt.pipeline.context import MolContext
from scpt.pipeline.stages import filter_property, filter_similarity, filter_structure, mine_pairs
from scpt.pipeline.triplets import build_triplets
from scpt.pipeline.types import CandidatePair, PipelineConfig, PreferenceTriplet

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    mined: list[CandidatePair]
    prop: list[CandidatePair]
    sim: list[CandidatePair]
    sft: list[CandidatePair]
    triplets: list[PreferenceTriplet]
    counters: Counter = field(default_factory=Counter)

    def stage_counts(self) -> dict[str, int]:
        return {
            "mined": len(self.mined),
            "property": len(self.prop),
            "similarity": len(self.sim),
            "structure": len(self.sft),
            "triplets": len(self.triplets),
        }


def config_echo(cfg: PipelineConfig) -> dict:
    return {
        "task": cfg.task,
        "specs": [
            {"name": s.name, "direction": s.direction, "weight": s.weight, "threshold": s.threshold}
            for s in cfg.specs
        ],
        "similarity": {"lo": cfg.similarity.lo, "hi": cfg.similarity.hi},
        "delta": cfg.effective_delta,
        "all_better": cfg.effective_all_better,
        "upper_half": cfg.upper_half,
        "gamma_mcs": cfg.gamma_mcs,
        "mcs_budget": cfg.mcs_budget,
        "strict_attachment": cfg.strict_attachment,
        "strategy": cfg.strategy,
        "triplet_cap": cfg.triplet_cap,
        "context": cfg.context,
        "seed": cfg.seed,
    }


def run_pipeline(corpus: Sequence[Molecule], cfg: PipelineConfig, ctx: MolContext) -> PipelineResult:
    counters: Counter = Counter()
    mined = list(mine_pairs(corpus, ctx, cfg.strategy, cfg.all_pairs_limit))
    log.info("mined %d pairs", len(mined))
    prop = filter_property(mined, cfg.specs, cfg.effective_delta, cfg.effective_all_better, ctx,
                           counters, upper_half=cfg.upper_half)
    log.info("property stage kept %d", len(prop))
    sim = filter_similarity(prop, cfg.similarity, ctx)
    log.info("similarity stage kept %d", len(sim))
    sft = filter_structure(sim, cfg.gamma_mcs, cfg.mcs_budget, ctx, cfg.strict_attachment, counters, cfg.jobs)
    log.info("structure stage kept %d", len(sft))
    triplets = build_triplets(sft, cfg.specs, ctx, cfg.triplet_cap, cfg.seed, cfg.context)
    log.info("built %d triplets", len(triplets))
    return PipelineResult(mined, prop, sim, sft, triplets, counters)


def run_report(result: PipelineResult, cfg: PipelineConfig, inputs: dict | None = None) -> dict:
    return {
        "inputs": inputs or {},
        "stages": result.stage_counts(),
        "misses": dict(sorted(result.counters.items())),
        "config": config_echo(cfg),
        "seed": cfg.seed,
    }
