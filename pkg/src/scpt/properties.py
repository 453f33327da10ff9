"""Property specifications, oracles and the directional property delta.

A task is a list of PropertySpec.  ``delta_p`` is the weighted, direction
signed sum of property changes; ``all_better`` checks every property's
directional change against its own threshold (inclusive).

Oracles are either score tables loaded from TSV (keyed by canonical SMILES)
or small deterministic builtins computed from the graph.  Builtins are
plumbing for demos and tests, not chemistry models.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Literal, Mapping, Sequence

from scpt.errors import MissingProperty, OracleLoadError, OracleMiss, SmilesError
from scpt.molgraph import Molecule, parse_smiles

log = logging.getLogger(__name__)

PropertyProfile = Mapping[str, float]


@dataclass(frozen=True)
class PropertySpec:
    name: str
    direction: int = 1
    weight: float = 1.0
    threshold: float = 0.0
    label: str = ""  # display name used in prompts; defaults to name

    def __post_init__(self) -> None:
        if self.direction not in (-1, 1):
            raise ValueError(f"direction must be -1 or +1, got {self.direction}")
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise ValueError(f"weight must be finite and >= 0, got {self.weight}")
        if not self.label:
            object.__setattr__(self, "label", self.name)

    @property
    def verb(self) -> str:
        return "increase" if self.direction > 0 else "decrease"


# Improvement thresholds per endpoint; Mutag is minimised.
STANDARD_PROPERTIES: dict[str, PropertySpec] = {
    "plogp": PropertySpec("plogp", +1, 1.0, 1.0, "pLogP"),
    "qed": PropertySpec("qed", +1, 1.0, 0.1, "QED"),
    "hia": PropertySpec("hia", +1, 1.0, 0.05, "HIA"),
    "bbbp": PropertySpec("bbbp", +1, 1.0, 0.2, "BBBP"),
    "drd2": PropertySpec("drd2", +1, 1.0, 0.2, "DRD2"),
    "mutag": PropertySpec("mutag", -1, 1.0, 0.1, "Mutag"),
    "jnk3": PropertySpec("jnk3", +1, 1.0, 0.05, "JNK3"),
    "gsk3b": PropertySpec("gsk3b", +1, 1.0, 0.05, "GSK3β"),
}

# Named multi-property tasks; any "a+b+..." combination of standard names also works.
TASK_ALIASES: dict[str, tuple[str, ...]] = {
    "bdp": ("bbbp", "drd2", "plogp"),
    "bdq": ("bbbp", "drd2", "qed"),
    "bpq": ("bbbp", "plogp", "qed"),
    "dpq": ("drd2", "plogp", "qed"),
    "bdpq": ("bbbp", "drd2", "plogp", "qed"),
    "gdp": ("gsk3b", "drd2", "plogp"),
    "gbd": ("gsk3b", "qed", "drd2"),
    "gqp": ("gsk3b", "qed", "plogp"),
}


def task_specs(task: str) -> list[PropertySpec]:
    """Resolve a task name ("plogp", "BDQ", "jnk3+qed", ...) to its specs."""
    key = task.strip().lower().replace("β", "b")
    if key in TASK_ALIASES:
        names: Sequence[str] = TASK_ALIASES[key]
    else:
        names = [n.strip() for n in key.split("+")]
    unknown = [n for n in names if n not in STANDARD_PROPERTIES]
    if unknown or not names:
        raise KeyError(f"unknown task {task!r} (unknown properties: {unknown})")
    return [STANDARD_PROPERTIES[n] for n in names]


# Absolute slack on threshold tests, so a decimal gain such as 0.45 - 0.25 still
# counts as reaching 0.2 despite binary rounding.
THRESHOLD_TOL = 1e-9


def reaches(value: float, threshold: float) -> bool:
    """Inclusive threshold test with THRESHOLD_TOL slack."""
    return value >= threshold - THRESHOLD_TOL


def _value(profile: PropertyProfile, name: str) -> float:
    try:
        return float(profile[name])
    except KeyError:
        raise MissingProperty(name) from None


def directional_changes(specs: Sequence[PropertySpec], sou: PropertyProfile,
                        opt: PropertyProfile) -> list[float]:
    """s_i * (p_i(opt) - p_i(sou)) for each spec."""
    return [s.direction * (_value(opt, s.name) - _value(sou, s.name)) for s in specs]


def delta_p(specs: Sequence[PropertySpec], sou: PropertyProfile, opt: PropertyProfile) -> float:
    changes = directional_changes(specs, sou, opt)
    return math.fsum(s.weight * c for s, c in zip(specs, changes))


def all_better(specs: Sequence[PropertySpec], sou: PropertyProfile, opt: PropertyProfile) -> bool:
    changes = directional_changes(specs, sou, opt)
    return all(reaches(c, s.threshold) for s, c in zip(specs, changes))


def objective(specs: Sequence[PropertySpec], profile: PropertyProfile) -> float:
    """Weighted directional score sum_i w_i * s_i * p_i(m)."""
    return math.fsum(s.weight * s.direction * _value(profile, s.name) for s in specs)


# --- builtin oracles -------------------------------------------------------

# Per-atom contributions of the toy additive logP (aromatic atoms lower case).
TOY_LOGP_CONTRIBUTIONS: dict[str, float] = {
    "C": 0.36, "c": 0.29,
    "N": -0.60, "n": -0.50,
    "O": -0.40, "o": 0.05,
    "S": 0.50, "s": 0.60,
    "P": 0.20, "p": 0.20,
    "B": -0.30, "b": -0.30,
    "F": 0.40, "Cl": 0.80, "Br": 1.00, "I": 1.30,
}
TOY_LOGP_PER_HYDROGEN = 0.12
TOY_LOGP_CHARGED = -1.0
TOY_LOGP_OTHER = 0.0


def heavy_atom_count(mol: Molecule) -> float:
    return float(mol.heavy_atom_count())


def ring_count(mol: Molecule) -> float:
    return float(len(mol.rings))


def hetero_fraction(mol: Molecule) -> float:
    heavy = [a for a in mol.atoms if not a.is_dummy]
    return sum(1 for a in heavy if a.element not in ("C", "H")) / len(heavy)


def additive_logp_toy(mol: Molecule) -> float:
    """Sum of fixed per-atom contributions; a stand-in for a real logP model."""
    total = 0.0
    for a in mol.atoms:
        if a.is_dummy:
            continue
        key = a.element.lower() if a.aromatic else a.element
        total += TOY_LOGP_CONTRIBUTIONS.get(key, TOY_LOGP_OTHER)
        total += TOY_LOGP_PER_HYDROGEN * a.hydrogen_count
        if a.charge:
            total += TOY_LOGP_CHARGED
    return round(total, 10)


BUILTINS: dict[str, Callable[[Molecule], float]] = {
    "heavy_atom_count": heavy_atom_count,
    "ring_count": ring_count,
    "hetero_fraction": hetero_fraction,
    "additive_logp_toy": additive_logp_toy,
}


# --- oracle sources --------------------------------------------------------

@dataclass
class OracleSource:
    """Where property values come from.

    ``kind == "builtin"``: ``names`` lists builtin functions; each maps to a
    property of the same name unless ``columns`` renames it.
    ``kind == "file"``: scores loaded from ``path``; ``columns`` optionally
    maps property name -> TSV column.
    """

    kind: Literal["builtin", "file"]
    names: tuple[str, ...] = ()
    path: Path | None = None
    columns: dict[str, str] = field(default_factory=dict)
    table: dict[str, dict[str, float]] = field(default_factory=dict, repr=False)
    skipped_rows: int = 0

    @classmethod
    def builtin(cls, *names: str, rename: Mapping[str, str] | None = None) -> "OracleSource":
        for n in names:
            if n not in BUILTINS:
                raise KeyError(f"unknown builtin oracle {n!r}; choose from {sorted(BUILTINS)}")
        return cls("builtin", tuple(names), columns=dict(rename or {}))

    @classmethod
    def from_tsv(cls, path: str | Path, columns: Mapping[str, str] | None = None) -> "OracleSource":
        table, skipped, header = load_property_table(path)
        mapping = dict(columns or {})
        for prop, col in mapping.items():
            if col not in header:
                raise OracleLoadError(f"{path}: column {col!r} (for {prop!r}) not in header {header}")
        names = tuple(mapping) if mapping else tuple(header)
        return cls("file", names, Path(path), mapping, table, skipped)

    @property
    def provides(self) -> tuple[str, ...]:
        if self.kind == "builtin":
            return tuple(self.columns.get(n, n) for n in self.names)
        return self.names

    def lookup(self, mol: Molecule) -> dict[str, float]:
        if self.kind == "builtin":
            return {self.columns.get(n, n): BUILTINS[n](mol) for n in self.names}
        key = mol.canonical_form
        row = self.table.get(key)
        if row is None:
            raise OracleMiss(key)
        return {n: row[self.columns.get(n, n)] for n in self.names}


def lookup(oracle: OracleSource, mol: Molecule) -> dict[str, float]:
    return oracle.lookup(mol)


class OracleSet:
    """Several sources merged into one profile per molecule, memoised."""

    def __init__(self, sources: Iterable[OracleSource]) -> None:
        self.sources = list(sources)
        self._cache: dict[str, dict[str, float] | None] = {}

    def profile(self, mol: Molecule) -> dict[str, float]:
        key = mol.canonical_form
        if key in self._cache:
            hit = self._cache[key]
            if hit is None:
                raise OracleMiss(key)
            return hit
        merged: dict[str, float] = {}
        try:
            for src in self.sources:
                merged.update(src.lookup(mol))
        except OracleMiss:
            self._cache[key] = None
            raise
        self._cache[key] = merged
        return merged


def load_property_table(path: str | Path) -> tuple[dict[str, dict[str, float]], int, list[str]]:
    """Read a "smiles<TAB>name..." score table keyed by canonical SMILES.

    Rows whose SMILES do not parse, or whose values are not numbers, are
    skipped and counted.  The same molecule listed twice with different
    values is a load error.
    """
    path = Path(path)
    table: dict[str, dict[str, float]] = {}
    skipped = 0
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise OracleLoadError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise OracleLoadError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip().lower() != "smiles":
            raise OracleLoadError(f"{path}: header must be 'smiles<TAB>name...', got {header}")
        names = [h.strip() for h in header[1:]]
        if len(set(names)) != len(names):
            raise OracleLoadError(f"{path}: duplicate column names in header")
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip() or row[0].startswith("#"):
                continue
            if len(row) != len(header):
                log.debug("%s:%d: expected %d fields, got %d", path, lineno, len(header), len(row))
                skipped += 1
                continue
            try:
                key = parse_smiles(row[0]).canonical_form
                values = {n: float(v) for n, v in zip(names, row[1:])}
            except (SmilesError, ValueError) as exc:
                log.debug("%s:%d: skipped (%s)", path, lineno, exc)
                skipped += 1
                continue
            if any(not math.isfinite(v) for v in values.values()):
                skipped += 1
                continue
            old = table.get(key)
            if old is not None and old != values:
                raise OracleLoadError(f"{path}:{lineno}: conflicting duplicate entry for {key}")
            table[key] = values
    return table, skipped, names
