"""Run configuration: an INI file read with configparser, validated up front.

Grammar: ``[section]`` headers followed by ``key = value`` lines; ``#`` and
``;`` start comments.  Unknown sections or keys are errors.  Every key is
optional; the defaults are listed in ``DEFAULTS``.  Lists are
comma-separated and mappings are comma-separated ``key=value`` items, e.g.::

    [task]
    name = bdp
    thresholds = drd2=0.3

    [oracle]
    builtin = additive_logp_toy
    rename = additive_logp_toy=plogp

    [pipeline]
    window = 0.7, 0.8
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from scpt.align_ref import DEFAULT_BETA
from scpt.decompose import DEFAULT_BUDGET
from scpt.errors import ConfigError
from scpt.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH
from scpt.metrics import DEFAULT_CANDIDATES, RI_EPSILON
from scpt.pipeline.sweep import GAP_WINDOW, STRATA
from scpt.pipeline.types import (
    DEFAULT_ALL_PAIRS_LIMIT,
    DEFAULT_GAMMA,
    DEFAULT_GAMMA_MCS,
    DEFAULT_TRIPLET_CAP,
    PipelineConfig,
    SimilarityMode,
)
from scpt.properties import STANDARD_PROPERTIES, OracleSource, PropertySpec, task_specs

DEFAULTS: dict[str, dict[str, str]] = {
    "task": {"name": "plogp", "thresholds": "", "weights": ""},
    "oracle": {"builtin": "", "rename": "", "table": "", "columns": ""},
    "pipeline": {
        "gamma": str(DEFAULT_GAMMA), "window": "", "delta": "", "all_better": "", "upper_half": "false",
        "gamma_mcs": str(DEFAULT_GAMMA_MCS), "mcs_budget": str(DEFAULT_BUDGET),
        "strict_attachment": "true", "strategy": "scaffold", "all_pairs_limit": str(DEFAULT_ALL_PAIRS_LIMIT),
        "triplet_cap": str(DEFAULT_TRIPLET_CAP), "context": "scaffold",
    },
    "fingerprint": {"radius": str(DEFAULT_RADIUS), "width": str(DEFAULT_WIDTH)},
    "align": {"beta": str(DEFAULT_BETA), "lr": "0.1", "steps": "200", "sft_steps": "0",
              "mode": "reference-normalized", "context_order": "2"},
    "eval": {"candidates": str(DEFAULT_CANDIDATES), "ri_epsilon": str(RI_EPSILON)},
    "sweep": {"per_bin_sample": "100", "strata": str(STRATA),
              "gap_window": f"{GAP_WINDOW[0]}, {GAP_WINDOW[1]}", "structure": "false"},
    "baseline": {"budget": "10", "max_moves": "200"},
    "run": {"seed": "0", "jobs": "1"},
}


@dataclass
class AlignSettings:
    beta: float = DEFAULT_BETA
    lr: float = 0.1
    steps: int = 200
    sft_steps: int = 0
    mode: str = "reference-normalized"
    context_order: int = 2


@dataclass
class SweepSettings:
    per_bin_sample: int = 100
    strata: int = STRATA
    gap_window: tuple[float, float] = GAP_WINDOW
    structure: bool = False


@dataclass
class RunConfig:
    pipeline: PipelineConfig
    oracles: list[OracleSource]
    radius: int = DEFAULT_RADIUS
    width: int = DEFAULT_WIDTH
    align: AlignSettings = field(default_factory=AlignSettings)
    candidates: int = DEFAULT_CANDIDATES
    ri_epsilon: float = RI_EPSILON
    sweep: SweepSettings = field(default_factory=SweepSettings)
    baseline_budget: int = 10
    baseline_max_moves: int = 200
    source: str | None = None

    @property
    def specs(self) -> list[PropertySpec]:
        return self.pipeline.specs

    @property
    def seed(self) -> int:
        return self.pipeline.seed

    def with_run(self, seed: int | None = None, jobs: int | None = None) -> "RunConfig":
        pc = self.pipeline
        if seed is not None:
            pc = replace(pc, seed=seed)
        if jobs is not None:
            pc = replace(pc, jobs=jobs)
        return replace(self, pipeline=pc)

    def echo(self) -> dict[str, Any]:
        from scpt.pipeline.run import config_echo

        return {
            "source": self.source,
            "pipeline": config_echo(self.pipeline),
            "oracles": [{"kind": o.kind, "names": list(o.names), "path": str(o.path) if o.path else None,
                         "columns": dict(sorted(o.columns.items()))} for o in self.oracles],
            "fingerprint": {"radius": self.radius, "width": self.width},
            "align": vars(self.align),
            "eval": {"candidates": self.candidates, "ri_epsilon": self.ri_epsilon},
            "sweep": {**vars(self.sweep), "gap_window": list(self.sweep.gap_window)},
            "baseline": {"budget": self.baseline_budget, "max_moves": self.baseline_max_moves},
        }


# --- value parsing ----------------------------------------------------------

def _float(sec: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected a number, got {raw!r}") from None


def _int(sec: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got {raw!r}") from None


def _bool(sec: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected true/false, got {raw!r}")


def _list(raw: str) -> list[str]:
    return [x.strip() for x in raw.split(",") if x.strip()]


def _mapping(sec: str, key: str, raw: str) -> dict[str, str]:
    out = {}
    for item in _list(raw):
        k, sep, v = item.partition("=")
        if not sep or not k.strip() or not v.strip():
            raise ConfigError(f"[{sec}] {key}: expected name=value items, got {item!r}")
        out[k.strip()] = v.strip()
    return out


def _pair(sec: str, key: str, raw: str) -> tuple[float, float]:
    parts = _list(raw)
    if len(parts) != 2:
        raise ConfigError(f"[{sec}] {key}: expected 'lo, hi', got {raw!r}")
    return _float(sec, key, parts[0]), _float(sec, key, parts[1])


# --- loading ----------------------------------------------------------------

def read_sections(path: str | Path | None = None, text: str | None = None) -> dict[str, dict[str, str]]:
    """Defaults overlaid with the file (or text), after checking every name."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        elif text is not None:
            parser.read_string(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    merged = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for sec in parser.sections():
        if sec not in DEFAULTS:
            raise ConfigError(f"unknown section [{sec}]; known: {', '.join(DEFAULTS)}")
        for key, val in parser.items(sec):
            if key not in DEFAULTS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]; known: {', '.join(DEFAULTS[sec])}")
            merged[sec][key] = val
    return merged


def build(sections: dict[str, dict[str, str]], source: str | None = None) -> RunConfig:
    t, o, p = sections["task"], sections["oracle"], sections["pipeline"]
    try:
        specs = task_specs(t["name"])
    except KeyError as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc)) from None
    known = {s.name for s in specs}
    for key in ("thresholds", "weights"):
        for name, val in _mapping("task", key, t[key]).items():
            if name not in known:
                raise ConfigError(f"[task] {key}: {name!r} is not a property of task {t['name']!r}")
            field_name = "threshold" if key == "thresholds" else "weight"
            specs = [replace(s, **{field_name: _float("task", key, val)}) if s.name == name else s
                     for s in specs]

    oracles: list[OracleSource] = []
    builtins = _list(o["builtin"])
    if builtins:
        try:
            oracles.append(OracleSource.builtin(*builtins, rename=_mapping("oracle", "rename", o["rename"])))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    elif o["rename"]:
        raise ConfigError("[oracle] rename needs builtin")
    if o["table"]:
        columns = _mapping("oracle", "columns", o["columns"])
        oracles.append(OracleSource.from_tsv(o["table"], columns or None))
    elif o["columns"]:
        raise ConfigError("[oracle] columns needs table")

    if p["window"]:
        mode_args = _pair("pipeline", "window", p["window"])
        sim_factory = SimilarityMode.window
    else:
        mode_args = (_float("pipeline", "gamma", p["gamma"]),)
        sim_factory = SimilarityMode.threshold
    run = sections["run"]
    try:
        similarity = sim_factory(*mode_args)
        pipeline = PipelineConfig(
            task=t["name"], specs=specs, similarity=similarity,
            delta=_float("pipeline", "delta", p["delta"]) if p["delta"] else None,
            all_better=_bool("pipeline", "all_better", p["all_better"]) if p["all_better"] else None,
            upper_half=_bool("pipeline", "upper_half", p["upper_half"]),
            gamma_mcs=_float("pipeline", "gamma_mcs", p["gamma_mcs"]),
            mcs_budget=_int("pipeline", "mcs_budget", p["mcs_budget"]),
            strict_attachment=_bool("pipeline", "strict_attachment", p["strict_attachment"]),
            strategy=p["strategy"],
            all_pairs_limit=_int("pipeline", "all_pairs_limit", p["all_pairs_limit"]),
            triplet_cap=_int("pipeline", "triplet_cap", p["triplet_cap"]),
            context=p["context"],
            seed=_int("run", "seed", run["seed"]),
            jobs=_int("run", "jobs", run["jobs"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    fp, a, e, sw, b = (sections[k] for k in ("fingerprint", "align", "eval", "sweep", "baseline"))
    radius, width = _int("fingerprint", "radius", fp["radius"]), _int("fingerprint", "width", fp["width"])
    if radius < 0 or width < 64 or width & (width - 1):
        raise ConfigError("[fingerprint] radius must be >= 0 and width a power of two >= 64")
    align = AlignSettings(
        beta=_float("align", "beta", a["beta"]), lr=_float("align", "lr", a["lr"]),
        steps=_int("align", "steps", a["steps"]), sft_steps=_int("align", "sft_steps", a["sft_steps"]),
        mode=a["mode"], context_order=_int("align", "context_order", a["context_order"]),
    )
    if align.beta <= 0 or align.lr <= 0 or align.steps < 0 or align.sft_steps < 0 or align.context_order < 1:
        raise ConfigError("[align] needs beta > 0, lr > 0, steps >= 0, sft_steps >= 0, context_order >= 1")
    if align.mode not in ("as-written", "reference-normalized"):
        raise ConfigError(f"[align] mode must be as-written or reference-normalized, got {align.mode!r}")
    sweep = SweepSettings(
        per_bin_sample=_int("sweep", "per_bin_sample", sw["per_bin_sample"]),
        strata=_int("sweep", "strata", sw["strata"]),
        gap_window=_pair("sweep", "gap_window", sw["gap_window"]),
        structure=_bool("sweep", "structure", sw["structure"]),
    )
    if sweep.per_bin_sample < 0 or sweep.strata < 1:
        raise ConfigError("[sweep] per_bin_sample must be >= 0 and strata >= 1")
    cfg = RunConfig(
        pipeline=pipeline, oracles=oracles, radius=radius, width=width, align=align,
        candidates=_int("eval", "candidates", e["candidates"]),
        ri_epsilon=_float("eval", "ri_epsilon", e["ri_epsilon"]), sweep=sweep,
        baseline_budget=_int("baseline", "budget", b["budget"]),
        baseline_max_moves=_int("baseline", "max_moves", b["max_moves"]), source=source,
    )
    if cfg.candidates < 1 or cfg.ri_epsilon < 0 or cfg.baseline_budget < 0 or cfg.baseline_max_moves < 0:
        raise ConfigError("[eval]/[baseline] values out of range")
    return cfg


def load_config(path: str | Path | None = None, text: str | None = None) -> RunConfig:
    return build(read_sections(path, text), None if path is None else str(path))


def defaults_snapshot() -> dict[str, Any]:
    """The out-of-the-box constants: per-property thresholds and the core knobs."""
    cfg = load_config()
    return {
        "thresholds": {name: (s.threshold, s.direction) for name, s in sorted(STANDARD_PROPERTIES.items())},
        "gamma": cfg.pipeline.similarity.lo,
        "gamma_mcs": cfg.pipeline.gamma_mcs,
        "candidates": cfg.candidates,
        "beta": cfg.align.beta,
    }
