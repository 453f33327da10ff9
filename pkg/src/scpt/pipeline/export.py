"""SFT / DPO record export and the pair TSV formats."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from scpt.errors import SmilesError
from scpt.molgraph import parse_smiles
from scpt.pipeline.types import CandidatePair, PreferenceTriplet
from scpt.properties import PropertySpec

log = logging.getLogger(__name__)

ROLE_LINE = "You are an expert medicinal chemist."
SFT_SINGLE_INSTRUCTION = (
    "Given a source molecule and a desired property change, modify the molecule as little as "
    "possible while preserving its overall structure, and generate a new molecule that satisfies "
    "the requirement. Return only the molecule as a SMILES string wrapped in <smiles> tags, "
    "with no additional text."
)
SFT_MULTI_INSTRUCTION = (
    "Given a source molecule and several desired property changes, modify the molecule as little "
    "as possible while preserving its overall structure, and generate a new molecule that "
    "satisfies all of the requirements. Return only the molecule as a SMILES string wrapped in "
    "<smiles> tags, with no additional text."
)
DPO_INSTRUCTION = (
    "Given a source molecule and several desired property changes, modify the molecule as little "
    "as possible while preserving its overall structure (scaffold), and generate a new molecule "
    "that satisfies all of the requirements. Return only the molecule as a SMILES string wrapped "
    "in <smiles> tags, with no additional text."
)


def wrap(smiles: str) -> str:
    return f"<smiles>{smiles}<smiles>"


def property_phrase(specs: Sequence[PropertySpec]) -> str:
    return ", ".join(f"{s.verb} {s.label}" for s in specs)


def request_line(smiles: str, specs: Sequence[PropertySpec]) -> str:
    return f"Request: Given the source molecule {wrap(smiles)}, {property_phrase(specs)}."


def sft_prompt(source_smiles: str, specs: Sequence[PropertySpec]) -> str:
    instruction = SFT_SINGLE_INSTRUCTION if len(specs) == 1 else SFT_MULTI_INSTRUCTION
    return "\n".join([ROLE_LINE, instruction, request_line(source_smiles, specs), "Answer: "])


def dpo_prompt(scaffold_smiles: str, specs: Sequence[PropertySpec]) -> str:
    return "\n".join([ROLE_LINE, DPO_INSTRUCTION, request_line(scaffold_smiles, specs)])


def sft_record(pair: CandidatePair, specs: Sequence[PropertySpec]) -> dict[str, str]:
    return {
        "prompt": sft_prompt(pair.source.canonical_form, specs),
        "completion": wrap(pair.target.canonical_form),
    }


def dpo_record(t: PreferenceTriplet, specs: Sequence[PropertySpec]) -> dict[str, str]:
    return {
        "prompt": dpo_prompt(t.scaffold, specs),
        "chosen": wrap(t.better.canonical_form),
        "rejected": wrap(t.worse.canonical_form),
    }


def _write_jsonl(records: Iterable[dict], path: str | Path) -> int:
    n = 0
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
                n += 1
    except OSError as exc:
        raise OSError(f"{path}:{n + 1}: {exc}") from exc
    return n


def export_sft(pairs: Iterable[CandidatePair], specs: Sequence[PropertySpec], path: str | Path) -> int:
    """Write one {prompt, completion} JSON line per pair; returns the count."""
    return _write_jsonl((sft_record(p, specs) for p in pairs), path)


def export_dpo(triplets: Iterable[PreferenceTriplet], specs: Sequence[PropertySpec], path: str | Path) -> int:
    """Write one {prompt, chosen, rejected} JSON line per triplet."""
    return _write_jsonl((dpo_record(t, specs) for t in triplets), path)


# --- pair TSV ---------------------------------------------------------------

PAIR_HEADER = "src\ttgt\tsim\tgain\tstage_flags"


def _num(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_pairs(pairs: Iterable[CandidatePair], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PAIR_HEADER + "\n")
        for p in pairs:
            fh.write("\t".join([p.key[0], p.key[1], _num(p.sim), _num(p.gain), ",".join(p.flags)]) + "\n")
            n += 1
    return n


@dataclass
class PairFile:
    pairs: list[CandidatePair]
    invalid: int = 0


def read_pairs(path: str | Path) -> PairFile:
    """Read "src<TAB>tgt[<TAB>sim<TAB>gain<TAB>flags]" lines.

    A header line starting with "src" is skipped; unparsable lines and
    self-pairs are skipped and counted.
    """
    out = PairFile([])
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if lineno == 1 and fields[0].strip().lower() in ("src", "src_smiles", "source"):
                continue
            if len(fields) < 2:
                out.invalid += 1
                continue
            try:
                src, tgt = parse_smiles(fields[0]), parse_smiles(fields[1])
                sim = float(fields[2]) if len(fields) > 2 and fields[2] else None
                gain = float(fields[3]) if len(fields) > 3 and fields[3] else None
                flags = tuple(fields[4].split(",")) if len(fields) > 4 and fields[4] else ("mined",)
                if sim is not None and not math.isfinite(sim):
                    raise ValueError("non-finite similarity")
                out.pairs.append(CandidatePair(src, tgt, sim, gain, flags))
            except (SmilesError, ValueError) as exc:
                log.debug("%s:%d: skipped (%s)", path, lineno, exc)
                out.invalid += 1
    return out
