"""Preference-data curation: mining, filtering, triplets, export, sweeps."""

from __future__ import annotations

from scpt.pipeline.context import MolContext
from scpt.pipeline.corpus import Corpus, corpus_from_smiles, load_corpus
from scpt.pipeline.export import (
    dpo_prompt,
    dpo_record,
    export_dpo,
    export_sft,
    read_pairs,
    sft_prompt,
    sft_record,
    write_pairs,
)
from scpt.pipeline.run import PipelineResult, config_echo, run_pipeline, run_report
from scpt.pipeline.stages import (
    filter_property,
    filter_similarity,
    filter_structure,
    mine_pairs,
    structure_check,
)
from scpt.pipeline.sweep import GAP_BINS, SIM_BINS, SweepReport, SweepRow, stratified_sample, sweep
from scpt.pipeline.triplets import build_triplets, mcs_context
from scpt.pipeline.types import (
    STAGES,
    CandidatePair,
    PipelineConfig,
    PreferenceTriplet,
    SimilarityMode,
)

__all__ = [
    "GAP_BINS", "SIM_BINS", "STAGES",
    "CandidatePair", "Corpus", "MolContext", "PipelineConfig", "PipelineResult",
    "PreferenceTriplet", "SimilarityMode", "SweepReport", "SweepRow",
    "build_triplets", "config_echo", "corpus_from_smiles", "dpo_prompt", "dpo_record",
    "export_dpo", "export_sft", "filter_property", "filter_similarity", "filter_structure",
    "load_corpus", "mcs_context", "mine_pairs", "read_pairs", "run_pipeline", "run_report",
    "sft_prompt", "sft_record", "stratified_sample", "structure_check", "sweep", "write_pairs",
]
