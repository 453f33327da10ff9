"""Records and configuration flowing through the curation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

from scpt.decompose import DEFAULT_BUDGET
from scpt.molgraph import Molecule
from scpt.properties import PropertySpec, task_specs

STAGES = ("mined", "property", "similarity", "structure")

DEFAULT_GAMMA = 0.6
DEFAULT_GAMMA_MCS = 0.9
DEFAULT_TRIPLET_CAP = 64
DEFAULT_ALL_PAIRS_LIMIT = 2000


@dataclass(frozen=True)
class CandidatePair:
    source: Molecule
    target: Molecule
    sim: float | None = None
    gain: float | None = None
    flags: tuple[str, ...] = ("mined",)

    def __post_init__(self) -> None:
        if self.source.canonical_form == self.target.canonical_form:
            raise ValueError("pair source and target are the same molecule")

    @property
    def key(self) -> tuple[str, str]:
        return (self.source.canonical_form, self.target.canonical_form)

    def passed(self, stage: str, **updates) -> "CandidatePair":
        return replace(self, flags=self.flags + (stage,), **updates)


@dataclass(frozen=True)
class PreferenceTriplet:
    scaffold: str
    better: Molecule
    worse: Molecule
    gain_better: float
    gain_worse: float

    def __post_init__(self) -> None:
        if not self.gain_better > self.gain_worse:
            raise ValueError("a triplet needs gain_better > gain_worse")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.scaffold, self.better.canonical_form, self.worse.canonical_form)


@dataclass(frozen=True)
class SimilarityMode:
    """Either a lower threshold (``hi`` is None) or a half-open window [lo, hi)."""

    lo: float = DEFAULT_GAMMA
    hi: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.lo <= 1.0:
            raise ValueError(f"similarity bound {self.lo} outside [0, 1]")
        if self.hi is not None and not self.lo < self.hi:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi})")

    @classmethod
    def threshold(cls, gamma: float) -> "SimilarityMode":
        return cls(gamma, None)

    @classmethod
    def window(cls, lo: float, hi: float) -> "SimilarityMode":
        return cls(lo, hi)

    def accepts(self, sim: float) -> bool:
        if self.hi is None:
            return sim >= self.lo
        return self.lo <= sim < self.hi

    def describe(self) -> str:
        return f">= {self.lo}" if self.hi is None else f"[{self.lo}, {self.hi})"


@dataclass
class PipelineConfig:
    task: str = "plogp"
    specs: list[PropertySpec] = field(default_factory=list)
    similarity: SimilarityMode = field(default_factory=SimilarityMode)
    delta: float | None = None  # None: task threshold (single) or 0 (multi)
    all_better: bool | None = None  # None: on for multi-property tasks
    upper_half: bool = False
    gamma_mcs: float = DEFAULT_GAMMA_MCS
    mcs_budget: int = DEFAULT_BUDGET
    strict_attachment: bool = True
    strategy: Literal["scaffold", "all"] = "scaffold"
    all_pairs_limit: int = DEFAULT_ALL_PAIRS_LIMIT
    triplet_cap: int = DEFAULT_TRIPLET_CAP
    context: Literal["scaffold", "mcs"] = "scaffold"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.specs:
            self.specs = task_specs(self.task)
        if not 0.0 < self.gamma_mcs <= 1.0:
            raise ValueError(f"gamma_mcs must be in (0, 1], got {self.gamma_mcs}")
        if self.delta is not None and self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.strategy not in ("scaffold", "all"):
            raise ValueError(f"unknown mining strategy {self.strategy!r}")
        if self.context not in ("scaffold", "mcs"):
            raise ValueError(f"unknown triplet context {self.context!r}")
        if self.triplet_cap < 0:
            raise ValueError("triplet_cap must be >= 0")
        if self.mcs_budget <= 0:
            raise ValueError("mcs_budget must be positive")

    @property
    def multi(self) -> bool:
        return len(self.specs) > 1

    @property
    def effective_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return 0.0 if self.multi else self.specs[0].threshold

    @property
    def effective_all_better(self) -> bool:
        return self.multi if self.all_better is None else self.all_better
