"""Reading molecule corpora: one SMILES per line, extra tab fields ignored."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from scpt.errors import SmilesError
from scpt.molgraph import Molecule, parse_components, parse_smiles

log = logging.getLogger(__name__)


@dataclass
class Corpus:
    molecules: list[Molecule]
    lines: int = 0
    invalid: int = 0
    duplicates: int = 0
    split: int = 0  # extra molecules obtained by splitting '.' inputs
    errors: list[tuple[int, str]] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.molecules)

    def stats(self) -> dict[str, int]:
        return {
            "lines": self.lines,
            "molecules": len(self.molecules),
            "invalid": self.invalid,
            "duplicates": self.duplicates,
            "split_components": self.split,
        }


def corpus_from_smiles(smiles: Iterable[str], *, split_components: bool = False) -> Corpus:
    """Parse, skip-and-count invalid entries, drop duplicate canonical forms.

    Molecules keep first-seen order.
    """
    out = Corpus([])
    seen: set[str] = set()
    for lineno, raw in enumerate(smiles, start=1):
        text = raw.split("\t", 1)[0].strip()
        if not text or text.startswith("#"):
            continue
        out.lines += 1
        try:
            mols = parse_components(text) if split_components else [parse_smiles(text)]
        except SmilesError as exc:
            out.invalid += 1
            out.errors.append((lineno, f"{text}: {exc}"))
            log.debug("line %d skipped: %s (%s)", lineno, text, exc)
            continue
        out.split += len(mols) - 1
        for mol in mols:
            key = mol.canonical_form
            if key in seen:
                out.duplicates += 1
                continue
            seen.add(key)
            out.molecules.append(mol)
    return out


def load_corpus(path: str | Path, *, split_components: bool = False) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return corpus_from_smiles(fh, split_components=split_components)
