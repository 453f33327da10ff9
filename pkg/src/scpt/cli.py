"""Command-line entry point: ``scpt <subcommand> [options]``.

Exit status: 0 success, 1 configuration error, 2 input error, 3 internal
invariant violation.  ``SCPT_LOG`` (quiet, info, debug) sets log verbosity.
Every artifact-writing command also writes ``<out>/<subcommand>.report.json``
holding the config echo and seed; outputs depend only on inputs, config and
seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from scpt import __version__
from scpt.config import RunConfig, load_config
from scpt.errors import (
    ConfigError,
    CorpusTooLarge,
    EmptyBatch,
    MissingProperty,
    OracleLoadError,
    ScptError,
    SmilesError,
)

log = logging.getLogger("scpt")

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

PLANS: dict[str, list[str]] = {
    "canon": ["read corpus", "canonicalize", "write canonical.smi"],
    "fp": ["read corpus", "fingerprint", "write fingerprints.bin", "write pairwise.tsv"],
    "mine": ["read corpus", "mine pairs", "write pairs.mined.tsv"],
    "filter": ["read corpus or pairs", "property filter", "similarity filter", "structure filter",
               "write pairs.<stage>.tsv"],
    "triplets": ["read corpus", "filter stages", "build triplets", "write triplets.tsv"],
    "export-sft": ["read corpus", "filter stages", "write sft.jsonl"],
    "export-dpo": ["read corpus", "filter stages", "build triplets", "write dpo.jsonl"],
    "eval": ["read candidates", "score", "select best", "write metrics.json"],
    "sweep": ["read corpus", "mine pairs", "property filter", "bin and sample", "write sweep.json"],
    "align-demo": ["read preferences", "train SFT then DPO", "write history.tsv"],
    "baseline": ["read library corpus", "hill climb", "write trace.tsv"],
}


class InputError(ScptError):
    """Unreadable or unusable input file."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("scpt") / "data" / name))


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("SCPT_LOG", "").strip().lower(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _fmt(v: float | None, digits: int = 4, empty: str = "") -> str:
    return empty if v is None else f"{v:.{digits}f}"


def _report(args, cfg: RunConfig, body: dict) -> None:
    report = {"command": args.command, "version": __version__, "seed": cfg.seed, "config": cfg.echo(), **body}
    _dump(report, Path(args.out) / f"{args.command}.report.json")


def _context(cfg: RunConfig, need_oracles: bool = True):
    from scpt.pipeline import MolContext
    from scpt.properties import OracleSet

    if need_oracles:
        provided = {name for o in cfg.oracles for name in o.provides}
        missing = [s.name for s in cfg.specs if s.name not in provided]
        if missing:
            raise ConfigError(f"no oracle provides {missing}; configure [oracle] builtin/table")
    return MolContext(OracleSet(cfg.oracles), cfg.radius, cfg.width)


def _corpus(path: str):
    from scpt.pipeline import load_corpus

    try:
        corpus = load_corpus(path)
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc
    for lineno, msg in corpus.errors[:20]:
        log.warning("%s:%d: skipped %s", path, lineno, msg)
    return corpus


# --- subcommands ------------------------------------------------------------

def cmd_canon(args, cfg: RunConfig) -> int:
    corpus = _corpus(args.input)
    out = Path(args.out) / "canonical.smi"
    out.write_text("".join(m.canonical_form + "\n" for m in corpus.molecules), encoding="utf-8")
    _report(args, cfg, {"inputs": {"corpus": args.input, **corpus.stats()}, "outputs": [out.name]})
    return EXIT_OK


def cmd_fp(args, cfg: RunConfig) -> int:
    from scpt.fingerprint import ecfp, tanimoto, write_cache

    corpus = _corpus(args.input)
    fps = {m.canonical_form: ecfp(m, cfg.radius, cfg.width) for m in corpus.molecules}
    out = Path(args.out)
    write_cache(out / "fingerprints.bin", fps, cfg.radius, cfg.width)
    keys = sorted(fps)
    outputs = ["fingerprints.bin"]
    if len(keys) <= args.pairwise_limit:
        with open(out / "pairwise.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("a\tb\ttanimoto\n")
            for i, a in enumerate(keys):
                for b in keys[i + 1:]:
                    fh.write(f"{a}\t{b}\t{tanimoto(fps[a], fps[b])!r}\n")
        outputs.append("pairwise.tsv")
    else:
        log.warning("%d molecules exceed --pairwise-limit %d; pairwise.tsv not written",
                    len(keys), args.pairwise_limit)
    _report(args, cfg, {"inputs": {"corpus": args.input, **corpus.stats()}, "outputs": outputs})
    return EXIT_OK


def cmd_mine(args, cfg: RunConfig) -> int:
    from scpt.pipeline import mine_pairs, write_pairs

    corpus = _corpus(args.input)
    ctx = _context(cfg, need_oracles=False)
    pc = cfg.pipeline
    n = write_pairs(mine_pairs(corpus.molecules, ctx, pc.strategy, pc.all_pairs_limit),
                    Path(args.out) / "pairs.mined.tsv")
    _report(args, cfg, {"inputs": {"corpus": args.input, **corpus.stats()}, "stages": {"mined": n},
                        "outputs": ["pairs.mined.tsv"]})
    return EXIT_OK


def _run_stages(args, cfg: RunConfig, want_triplets: bool):
    """Mine (or read) pairs and run the filters; returns (result, inputs, ctx)."""
    from scpt.pipeline import (
        PipelineResult,
        build_triplets,
        filter_property,
        filter_similarity,
        filter_structure,
        mine_pairs,
        read_pairs,
    )

    ctx = _context(cfg)
    pc = cfg.pipeline
    if getattr(args, "pairs", None):
        try:
            pf = read_pairs(args.pairs)
        except OSError as exc:
            raise InputError(f"cannot read pairs {args.pairs}: {exc}") from exc
        mined = sorted(pf.pairs, key=lambda p: p.key)
        inputs = {"pairs": args.pairs, "pairs_read": len(mined), "invalid": pf.invalid}
    else:
        corpus = _corpus(args.input)
        mined = list(mine_pairs(corpus.molecules, ctx, pc.strategy, pc.all_pairs_limit))
        inputs = {"corpus": args.input, **corpus.stats()}
    counters: Counter = Counter()
    prop = filter_property(mined, pc.specs, pc.effective_delta, pc.effective_all_better, ctx, counters,
                           upper_half=pc.upper_half)
    sim = filter_similarity(prop, pc.similarity, ctx)
    sft = filter_structure(sim, pc.gamma_mcs, pc.mcs_budget, ctx, pc.strict_attachment, counters, pc.jobs)
    triplets = build_triplets(sft, pc.specs, ctx, pc.triplet_cap, pc.seed, pc.context) if want_triplets else []
    return PipelineResult(mined, prop, sim, sft, triplets, counters), inputs, ctx


def _stage_body(result, inputs: dict, outputs: list[str], with_triplets: bool) -> dict:
    stages = result.stage_counts()
    if not with_triplets:
        stages.pop("triplets")
    return {"inputs": inputs, "stages": stages, "misses": dict(sorted(result.counters.items())),
            "outputs": outputs}


def cmd_filter(args, cfg: RunConfig) -> int:
    from scpt.pipeline import write_pairs

    result, inputs, _ = _run_stages(args, cfg, want_triplets=False)
    out = Path(args.out)
    outputs = []
    for name, pairs in (("property", result.prop), ("similarity", result.sim), ("structure", result.sft)):
        write_pairs(pairs, out / f"pairs.{name}.tsv")
        outputs.append(f"pairs.{name}.tsv")
    _report(args, cfg, _stage_body(result, inputs, outputs, False))
    return EXIT_OK


def write_triplets(triplets, path: Path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("scaffold\tbetter\tworse\tgain_better\tgain_worse\n")
        for t in triplets:
            fh.write(f"{t.scaffold}\t{t.better.canonical_form}\t{t.worse.canonical_form}\t"
                     f"{t.gain_better!r}\t{t.gain_worse!r}\n")
    return len(triplets)


def cmd_triplets(args, cfg: RunConfig) -> int:
    result, inputs, _ = _run_stages(args, cfg, want_triplets=True)
    write_triplets(result.triplets, Path(args.out) / "triplets.tsv")
    _report(args, cfg, _stage_body(result, inputs, ["triplets.tsv"], True))
    return EXIT_OK


def cmd_export_sft(args, cfg: RunConfig) -> int:
    from scpt.pipeline import export_sft

    result, inputs, _ = _run_stages(args, cfg, want_triplets=False)
    n = export_sft(result.sft, cfg.specs, Path(args.out) / "sft.jsonl")
    body = _stage_body(result, inputs, ["sft.jsonl"], False)
    body["records"] = n
    _report(args, cfg, body)
    return EXIT_OK


def cmd_export_dpo(args, cfg: RunConfig) -> int:
    from scpt.pipeline import export_dpo

    result, inputs, _ = _run_stages(args, cfg, want_triplets=True)
    n = export_dpo(result.triplets, cfg.specs, Path(args.out) / "dpo.jsonl")
    body = _stage_body(result, inputs, ["dpo.jsonl"], True)
    body["records"] = n
    _report(args, cfg, body)
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    from scpt.metrics import evaluate, load_candidates

    ctx = _context(cfg)
    try:
        records, skipped = load_candidates(args.input, ctx.oracles)
    except OSError as exc:
        raise InputError(f"cannot read candidates {args.input}: {exc}") from exc
    over = [i for i, r in enumerate(records) if len(r.candidates) + r.invalid > cfg.candidates]
    if over:
        log.warning("%d records list more than %d candidates", len(over), cfg.candidates)
    report = evaluate(records, cfg.specs, cfg.radius, cfg.width, cfg.ri_epsilon)
    _dump(report.to_dict(), Path(args.out) / "metrics.json")
    print(f"SR = {report.sr:.3f}")
    print(f"SIM = {_fmt(report.mean_sim, 3, 'n/a')}")
    print(f"RI = {_fmt(report.mean_ri, 3, 'n/a')}")
    _report(args, cfg, {"inputs": {"candidates": args.input, "records": len(records), "skipped": skipped},
                        "summary": {"SR": report.sr, "mean_SIM": report.mean_sim, "mean_RI": report.mean_ri},
                        "counters": report.counters, "outputs": ["metrics.json"]})
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    from scpt.pipeline import sweep

    corpus = _corpus(args.input)
    ctx = _context(cfg)
    pc, sw = cfg.pipeline, cfg.sweep
    rep = sweep(corpus.molecules, pc.specs, ctx, axis=args.axis, per_bin_sample=sw.per_bin_sample,
                seed=pc.seed, delta=pc.delta, strategy=pc.strategy, all_pairs_limit=pc.all_pairs_limit,
                structure=sw.structure, gamma_mcs=pc.gamma_mcs, mcs_budget=pc.mcs_budget,
                gap_window=sw.gap_window, strata=sw.strata)
    out = Path(args.out)
    _dump(rep.to_dict(), out / "sweep.json")
    lines = ["bin\tavailable\tmean_sim\tmean_gain\tsampled\tsample_mean_sim\tsample_mean_gain\tinsufficient"]
    for r in rep.rows:
        lines.append(f"{r.label}\t{r.available}\t{_fmt(r.mean_sim)}\t{_fmt(r.mean_gain)}\t{r.sampled}\t"
                     f"{_fmt(r.sample_mean_sim)}\t{_fmt(r.sample_mean_gain)}\t{str(r.insufficient).lower()}")
    text = "\n".join(lines) + "\n"
    (out / "sweep.tsv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    for w in rep.warnings:
        log.warning("%s", w)
    _report(args, cfg, {"inputs": {"corpus": args.input, **corpus.stats()}, "axis": args.axis,
                        "rows": len(rep.rows), "outputs": ["sweep.json", "sweep.tsv"]})
    return EXIT_OK


def cmd_align_demo(args, cfg: RunConfig) -> int:
    from scpt.align_ref import PrefBatch, TokenPolicy, frontier, load_preferences, margins, train, write_history

    train_path = args.train or str(data_path("toy_prefs.jsonl"))
    held_path = args.heldout or str(data_path("toy_prefs_heldout.jsonl"))
    try:
        records = load_preferences(train_path)
        held = load_preferences(held_path)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if not records:
        raise InputError(f"{train_path}: no preference records")
    al = cfg.align
    alphabet = "".join(sorted({c for r in records + held for c in r.x + r.y_w + r.y_l}))
    policy = TokenPolicy(alphabet, al.context_order)
    res = train(policy, [(r.x, r.y_w) for r in records], PrefBatch(records, al.beta), al.steps, al.lr,
                mode=al.mode, seed=cfg.seed, sft_steps=al.sft_steps)
    write_history(res.history, Path(args.out) / "history.tsv")
    body = {"inputs": {"train": train_path, "heldout": held_path, "train_records": len(records),
                       "heldout_records": len(held)},
            "final_train_margin": res.history[-1].mean_margin if res.history else None,
            "outputs": ["history.tsv"]}
    if held:
        m = margins(res.policy, PrefBatch(held, al.beta), al.mode, res.reference)
        body["heldout_positive_fraction"] = float((m > 0).mean())
        body["heldout_mean_margin"] = float(m.mean())
    if args.frontier:
        grid = frontier(policy, records, (0.01, 0.1), (0.1, 0.3, 0.5), steps=al.steps)
        body["frontier"] = [{"lr": lr, "beta": b, "final_mean_margin": v} for (lr, b), v in sorted(grid.items())]
    print(json.dumps({k: v for k, v in body.items() if k not in ("inputs", "outputs")}, sort_keys=True))
    _report(args, cfg, body)
    return EXIT_OK


def cmd_baseline(args, cfg: RunConfig) -> int:
    from scpt.molgraph import parse_smiles
    from scpt.search_baseline import FragmentLibrary, hill_climb, write_trace

    try:
        source = parse_smiles(args.source)
    except SmilesError as exc:
        raise InputError(f"source {args.source!r}: {exc}") from exc
    lib_path = args.library or str(data_path("toy_200.smi"))
    corpus = _corpus(lib_path)
    lib = FragmentLibrary.from_molecules(corpus.molecules)
    ctx = _context(cfg)
    res = hill_climb(source, lib, cfg.specs, ctx, cfg.baseline_budget, cfg.seed, cfg.baseline_max_moves)
    write_trace(res.trace, Path(args.out) / "trace.tsv")
    summary = {"best": res.best.canonical_form, "fitness": res.fitness, "sim": res.sim,
               "steps": len(res.trace) - 1, "stopped": res.stopped}
    print(json.dumps(summary, sort_keys=True))
    _report(args, cfg, {"inputs": {"source": args.source, "library": lib_path, "fragments": len(lib)},
                        "result": summary, "outputs": ["trace.tsv"]})
    return EXIT_OK


COMMANDS: dict[str, Callable] = {
    "canon": cmd_canon, "fp": cmd_fp, "mine": cmd_mine, "filter": cmd_filter, "triplets": cmd_triplets,
    "export-sft": cmd_export_sft, "export-dpo": cmd_export_dpo, "eval": cmd_eval, "sweep": cmd_sweep,
    "align-demo": cmd_align_demo, "baseline": cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
    common.add_argument("--jobs", type=int, help="worker processes (overrides [run] jobs)")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--dry-run", action="store_true", help="validate config and print planned stages")

    ap = argparse.ArgumentParser(prog="scpt", description="Scaffold-conditioned preference data tools.")
    ap.add_argument("--version", action="version", version=f"scpt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "canon": "canonicalize a corpus", "fp": "fingerprints and pairwise Tanimoto",
        "mine": "mine candidate pairs", "filter": "run the filter stages",
        "triplets": "build preference triplets", "export-sft": "write SFT records",
        "export-dpo": "write DPO records", "eval": "SR/SIM/RI from a candidates file",
        "sweep": "similarity-bin or gap-bin sweep", "align-demo": "toy SFT + DPO run",
        "baseline": "fragment hill climbing",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name in ("canon", "fp", "mine", "triplets", "export-sft", "export-dpo", "sweep"):
            p.add_argument("input", help="corpus file, one SMILES per line")
        if name == "filter":
            p.add_argument("input", nargs="?", help="corpus file, one SMILES per line")
            p.add_argument("--pairs", help="pre-mined pair TSV (src<TAB>tgt) instead of a corpus")
        if name == "fp":
            p.add_argument("--pairwise-limit", type=int, default=500,
                           help="write pairwise.tsv only up to this many molecules")
        if name == "eval":
            p.add_argument("input", help="candidates TSV: source<TAB>cand_1<TAB>...")
        if name == "sweep":
            p.add_argument("--axis", choices=("sim", "gap"), default="sim")
        if name == "align-demo":
            p.add_argument("--train", help="preference JSONL (default: bundled toy set)")
            p.add_argument("--heldout", help="held-out preference JSONL (default: bundled)")
            p.add_argument("--frontier", action="store_true", help="also run the lr x beta grid")
        if name == "baseline":
            p.add_argument("source", help="source SMILES")
            p.add_argument("--library", help="corpus to harvest fragments from (default: bundled toy corpus)")
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.command == "filter" and not (args.input or args.pairs):
        print("scpt filter: give a corpus or --pairs", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = load_config(args.config).with_run(args.seed, args.jobs)
        if cfg.pipeline.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.dry_run:
            print(json.dumps({"command": args.command, "plan": PLANS[args.command], "config": cfg.echo()},
                             sort_keys=True, indent=2))
            return EXIT_OK
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"scpt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, OracleLoadError, CorpusTooLarge, EmptyBatch, MissingProperty, OSError) as exc:
        print(f"scpt: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # anything else is a bug or a broken invariant
        log.debug("internal error", exc_info=True)
        print(f"scpt: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
