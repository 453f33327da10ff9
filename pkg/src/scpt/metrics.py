"""Evaluation of optimisation outputs: best-of-k selection, SR, SIM and RI."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from scpt.errors import DegenerateBaseline, EmptyBatch, OracleMiss, SmilesError
from scpt.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH, ecfp, tanimoto
from scpt.molgraph import Molecule, parse_smiles
from scpt.properties import OracleSet, PropertyProfile, PropertySpec, directional_changes, objective, reaches

log = logging.getLogger(__name__)

RI_EPSILON = 1e-6
DEFAULT_CANDIDATES = 20


@dataclass
class EvalRecord:
    source: Molecule
    candidates: list[Molecule]
    source_profile: PropertyProfile
    candidate_profiles: list[PropertyProfile]
    invalid: int = 0  # candidates dropped (unparsable or without oracle values)
    selected: int | None = None

    def __post_init__(self) -> None:
        if len(self.candidates) != len(self.candidate_profiles):
            raise ValueError("one profile per candidate required")

    @property
    def chosen(self) -> Molecule | None:
        return None if self.selected is None else self.candidates[self.selected]


def select_best(rec: EvalRecord, specs: Sequence[PropertySpec]) -> int | None:
    """Index of the candidate maximising sum_i w_i s_i p_i; first index wins ties.

    Sets ``rec.selected``; returns None when the record has no valid candidate.
    """
    best, best_score = None, -math.inf
    for i, prof in enumerate(rec.candidate_profiles):
        score = objective(specs, prof)
        if score > best_score:
            best, best_score = i, score
    rec.selected = best
    return best


def meets_thresholds(specs: Sequence[PropertySpec], sou: PropertyProfile, cand: PropertyProfile) -> bool:
    return all(reaches(c, s.threshold) for s, c in zip(specs, directional_changes(specs, sou, cand)))


def success_witness(rec: EvalRecord, specs: Sequence[PropertySpec]) -> int | None:
    """First candidate meeting every threshold, or None."""
    for i, prof in enumerate(rec.candidate_profiles):
        if meets_thresholds(specs, rec.source_profile, prof):
            return i
    return None


def success(rec: EvalRecord, specs: Sequence[PropertySpec]) -> bool:
    return success_witness(rec, specs) is not None


def sr(records: Sequence[EvalRecord], specs: Sequence[PropertySpec]) -> float:
    if not records:
        raise EmptyBatch("success rate of an empty batch")
    return sum(1 for r in records if success(r, specs)) / len(records)


def sim_metric(rec: EvalRecord, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> float:
    """Tanimoto similarity between the source and the selected candidate."""
    if rec.selected is None:
        raise ValueError("no candidate selected")
    return tanimoto(ecfp(rec.source, radius, width), ecfp(rec.chosen, radius, width))


def ri(rec: EvalRecord, specs: Sequence[PropertySpec], eps: float = RI_EPSILON) -> float:
    """Mean over properties of s_i (p_i(selected) - p_i(source)) / p_i(source).

    The baseline is the signed source value; |p_i(source)| <= eps raises.
    """
    if rec.selected is None:
        raise ValueError("no candidate selected")
    chosen = rec.candidate_profiles[rec.selected]
    changes = directional_changes(specs, rec.source_profile, chosen)
    terms = []
    for s, c in zip(specs, changes):
        base = float(rec.source_profile[s.name])
        if abs(base) <= eps:
            raise DegenerateBaseline(s.name, base)
        terms.append(c / base)
    return math.fsum(terms) / len(terms)


# --- batch evaluation -------------------------------------------------------

@dataclass
class EvalRow:
    source: str
    n_valid: int
    n_invalid: int
    selected: str | None
    success: bool
    witness: str | None
    sim: float | None
    ri: float | None
    note: str = ""


@dataclass
class MetricsReport:
    sr: float
    mean_sim: float | None
    mean_ri: float | None
    n_records: int
    rows: list[EvalRow] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "SR": self.sr,
            "mean_SIM": self.mean_sim,
            "mean_RI": self.mean_ri,
            "n_records": self.n_records,
            "counters": dict(sorted(self.counters.items())),
            "rows": [asdict(r) for r in self.rows],
        }


def evaluate(records: Sequence[EvalRecord], specs: Sequence[PropertySpec],
             radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH, eps: float = RI_EPSILON) -> MetricsReport:
    """SR over all records; SIM and RI averaged over records with a selection.

    A record whose selected candidate differs from its success witness is
    counted under ``selected_not_witness``.
    """
    if not records:
        raise EmptyBatch("nothing to evaluate")
    counters = {"no_valid_candidates": 0, "degenerate_baseline": 0, "selected_not_witness": 0,
                "invalid_candidates": 0}
    rows, sims, ris, wins = [], [], [], 0
    for rec in records:
        counters["invalid_candidates"] += rec.invalid
        sel = select_best(rec, specs)
        wit = success_witness(rec, specs)
        ok = wit is not None
        wins += ok
        sim_v = ri_v = None
        note = ""
        if sel is None:
            counters["no_valid_candidates"] += 1
            note = "no valid candidates"
        else:
            sim_v = sim_metric(rec, radius, width)
            sims.append(sim_v)
            try:
                ri_v = ri(rec, specs, eps)
                ris.append(ri_v)
            except DegenerateBaseline as exc:
                counters["degenerate_baseline"] += 1
                note = str(exc)
            if ok and not meets_thresholds(specs, rec.source_profile, rec.candidate_profiles[sel]):
                counters["selected_not_witness"] += 1
        rows.append(EvalRow(
            rec.source.canonical_form, len(rec.candidates), rec.invalid,
            None if sel is None else rec.candidates[sel].canonical_form, ok,
            None if wit is None else rec.candidates[wit].canonical_form, sim_v, ri_v, note,
        ))
    return MetricsReport(wins / len(records), _mean(sims), _mean(ris), len(records), rows, counters)


def _mean(xs: Sequence[float]) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


def load_candidates(path: str | Path, oracles: OracleSet) -> tuple[list[EvalRecord], dict[str, int]]:
    """Read "source<TAB>cand_1<TAB>...<TAB>cand_k" lines into EvalRecords.

    Unparsable or oracle-less candidates are excluded and counted; lines
    whose source cannot be parsed or scored are skipped and counted.
    """
    records: list[EvalRecord] = []
    skipped = {"bad_source": 0, "source_oracle_miss": 0}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if lineno == 1 and fields[0].strip().lower() in ("source", "source_smiles", "src"):
                continue
            try:
                source = parse_smiles(fields[0])
                sp = oracles.profile(source)
            except SmilesError:
                skipped["bad_source"] += 1
                continue
            except OracleMiss:
                skipped["source_oracle_miss"] += 1
                continue
            cands, profs, invalid = [], [], 0
            for text in fields[1:]:
                if not text.strip():
                    continue
                try:
                    m = parse_smiles(text)
                    profs.append(oracles.profile(m))
                    cands.append(m)
                except (SmilesError, OracleMiss) as exc:
                    log.debug("%s:%d: candidate %r excluded (%s)", path, lineno, text, exc)
                    invalid += 1
            records.append(EvalRecord(source, cands, sp, profs, invalid))
    return records, skipped
