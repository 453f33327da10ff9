"""Scaffold-grouped preference triplets.

Scaffold context: pairs are grouped by the Murcko scaffold of their source.
The group's candidates are the distinct targets that share that scaffold.
Each candidate is scored by its gain over one fixed anchor, the group's
first source in canonical order, so gains inside a group are comparable
(with a linear gain this orders candidates by their weighted objective).
Every ordered (better, worse) candidate pair with a strictly larger gain
becomes a triplet; groups with more than ``cap`` are sampled down with a
generator seeded from (seed, scaffold).

Acyclic sources (empty scaffold) produce no triplets.

MCS context: every pair yields one triplet whose context is the pair's
maximum common substructure, with the target preferred over the source.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from scpt.decompose import mcs_ratio
from scpt.errors import OracleMiss
from scpt.molgraph import remove_atoms
from scpt.pipeline.context import MolContext
from scpt.pipeline.types import CandidatePair, PreferenceTriplet
from scpt.properties import PropertySpec, delta_p


def group_rng(seed: int, key: str) -> random.Random:
    # str seeds hash through SHA-512, so this is stable across runs and platforms
    return random.Random(f"{seed}:{key}")


def _sample(items: list, cap: int | None, rng: random.Random) -> list:
    if cap is None or len(items) <= cap:
        return items
    picked = sorted(rng.sample(range(len(items)), cap))
    return [items[i] for i in picked]


def build_triplets(pairs: Iterable[CandidatePair], specs: Sequence[PropertySpec], ctx: MolContext,
                   cap: int | None = None, seed: int = 0, context: str = "scaffold") -> list[PreferenceTriplet]:
    if context == "mcs":
        return _mcs_triplets(pairs, ctx)
    if context != "scaffold":
        raise ValueError(f"unknown triplet context {context!r}")

    groups: dict[str, list[CandidatePair]] = {}
    for p in pairs:
        groups.setdefault(ctx.scaffold(p.source).canonical_form, []).append(p)

    out: list[PreferenceTriplet] = []
    for key in sorted(groups):
        if not key:
            continue  # acyclic sources have no scaffold to condition on
        members = groups[key]
        anchor = min((p.source for p in members), key=lambda m: m.canonical_form)
        base = ctx.profile(anchor)
        cands = {}
        for p in members:
            t = p.target
            if t.canonical_form in cands or ctx.scaffold(t).canonical_form != key:
                continue
            try:
                cands[t.canonical_form] = (t, delta_p(specs, base, ctx.profile(t)))
            except OracleMiss:
                continue
        ranked = [cands[k] for k in sorted(cands)]
        group = []
        for b, gb in ranked:
            for w, gw in ranked:
                if gb > gw:
                    group.append(PreferenceTriplet(key, b, w, gb, gw))
        out.extend(_sample(group, cap, group_rng(seed, key)))
    return out


def mcs_context(a, b) -> str:
    """SMILES of the common substructure of ``a`` and ``b`` (taken from ``a``)."""
    res = mcs_ratio(a, b)
    keep = {i for i, _ in res.mapping}
    if not keep:
        return ""
    return remove_atoms(a, [i for i in range(len(a.atoms)) if i not in keep]).canonical_form


def _mcs_triplets(pairs: Iterable[CandidatePair], ctx: MolContext) -> list[PreferenceTriplet]:
    out = []
    for p in sorted(pairs, key=lambda q: q.key):
        if p.gain is None or p.gain <= 0:
            continue
        out.append(PreferenceTriplet(mcs_context(p.source, p.target), p.target, p.source, p.gain, 0.0))
    return out
