"""Deterministic synthetic corpora for demos, tests and the bundled data files.

Molecules are built by decorating ring cores with substituents: each
substituent is a SMILES fragment with one ``[*]`` that is spliced onto a
core atom carrying a hydrogen.  Because every molecule is a core plus a
bag of substituents, a property defined as a sum of per-fragment
contributions is exactly additive over fragments.

Run ``python -m scpt.synth OUTDIR`` to regenerate the bundled files.
"""

from __future__ import annotations

import argparse
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from scpt.molgraph import Molecule, parse_smiles
from scpt.molgraph.edit import join

CORES: tuple[str, ...] = (
    "c1ccccc1", "c1ccncc1", "c1ccsc1", "c1ccoc1", "C1CCCCC1", "C1CCNCC1",
    "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc(cc1)-c1ccccc1", "c1ccc(cc1)Cc1ccccc1",
    "C1CCOC1", "c1cnc2ccccc2c1", "C1CC1", "c1ncncn1", "O=C1CCCCN1", "c1ccc(cc1)OC1CCCC1",
    "c1cc[nH]c1", "C1CCC2(CC1)CCC2", "c1ccc2c(c1)CCC2", "c1ccc(cc1)C(=O)Nc1ccccc1",
)

SUBSTITUENTS: tuple[str, ...] = (
    "[*]C", "[*]CC", "[*]O", "[*]N", "[*]F", "[*]Cl", "[*]Br", "[*]C(=O)O", "[*]OC",
    "[*]C#N", "[*]C(F)(F)F", "[*]N(C)C", "[*]C(C)C", "[*]SC", "[*]C(N)=O", "[*]CO",
    "[*]NC(C)=O", "[*]OCC", "[*]S(=O)(=O)N", "[*]CCN",
)

# Larger cores and small substituents: one swap keeps ECFP similarity high,
# which the analogue-series corpora need.
SERIES_CORES: tuple[str, ...] = (
    "c1ccc(cc1)C(=O)Nc1ccccc1", "c1ccc(cc1)Cc1ccccc1", "c1ccc(cc1)-c1ccccc1",
    "c1ccc(cc1)OC1CCCC1", "c1ccc(cc1)S(=O)(=O)Nc1ccncc1", "c1ccc(cc1)Nc1ncccn1",
    "O=C(Nc1ccccc1)c1ccco1", "c1ccc2c(c1)ncn2Cc1ccccc1", "c1ccc(cc1)C(=O)N1CCNCC1",
    "c1ccc2c(c1)cc[nH]2",
)
SERIES_SUBSTITUENTS: tuple[str, ...] = (
    "[*]C", "[*]CC", "[*]O", "[*]N", "[*]F", "[*]Cl", "[*]Br", "[*]OC", "[*]C#N",
    "[*]C(F)(F)F", "[*]SC", "[*]CO", "[*]C(C)C", "[*]C(N)=O",
)


@dataclass(frozen=True)
class Decorated:
    core: str
    substituents: tuple[str, ...]  # one per decorated site
    molecule: Molecule


def _sites(mol: Molecule) -> list[int]:
    """Carbon atoms that still carry a hydrogen."""
    return [i for i, a in enumerate(mol.atoms) if a.hydrogen_count > 0 and a.element == "C"]


def decorate(core: str | Molecule, choices: Sequence[tuple[int, str]]) -> Molecule:
    """Attach substituent SMILES to core atom indices (indices refer to the core)."""
    mol = parse_smiles(core) if isinstance(core, str) else core
    for site, sub in choices:
        frag = parse_smiles(sub, allow_dummy=True)
        dummy = next(i for i, a in enumerate(frag.atoms) if a.is_dummy)
        mol = join(mol, site, frag, dummy)
    return mol


def random_decorated(rng: random.Random, cores: Sequence[str] = CORES,
                     substituents: Sequence[str] = SUBSTITUENTS, max_subs: int = 3,
                     min_subs: int = 0) -> Decorated:
    core = rng.choice(list(cores))
    base = parse_smiles(core)
    sites = _sites(base)
    k = rng.randint(min_subs, min(max_subs, len(sites)))
    chosen = sorted(rng.sample(sites, k))
    subs = tuple(rng.choice(list(substituents)) for _ in chosen)
    return Decorated(core, subs, decorate(base, list(zip(chosen, subs))))


def random_corpus(n: int, seed: int, **kwargs) -> list[Decorated]:
    """``n`` distinct decorated molecules (by canonical form)."""
    rng = random.Random(seed)
    seen: dict[str, Decorated] = {}
    attempts = 0
    while len(seen) < n:
        attempts += 1
        if attempts > 100 * n:
            raise RuntimeError("could not generate enough distinct molecules")
        d = random_decorated(rng, **kwargs)
        seen.setdefault(d.molecule.canonical_form, d)
    return list(seen.values())


def family_corpus(n_families: int, per_family: int, seed: int, sites_per_family: int = 3,
                  max_changes: int | None = None, substituents: Sequence[str] = SUBSTITUENTS,
                  cores: Sequence[str] = CORES) -> list[Decorated]:
    """Analogue series: each family fixes a core, sites and a base decoration.

    Members differ from the base at 1..``max_changes`` sites (default: all
    sites), so pairs inside a family range from single substitutions to
    completely redecorated cores.
    """
    rng = random.Random(seed)
    out: dict[str, Decorated] = {}
    subs_list = list(substituents)
    for f in range(n_families):
        core = cores[f % len(cores)]
        base = parse_smiles(core)
        sites = _sites(base)
        chosen = sorted(rng.sample(sites, min(sites_per_family, len(sites))))
        limit = len(chosen) if max_changes is None else min(max_changes, len(chosen))
        start = tuple(rng.choice(subs_list) for _ in chosen)
        made = 0
        tries = 0
        while made < per_family and tries < per_family * 50:
            tries += 1
            subs = list(start)
            if tries > 1:
                for j in rng.sample(range(len(chosen)), rng.randint(1, limit)):
                    subs[j] = rng.choice([x for x in subs_list if x != start[j]])
            mol = decorate(base, list(zip(chosen, subs)))
            key = mol.canonical_form
            if key in out:
                continue
            out[key] = Decorated(core, tuple(subs), mol)
            made += 1
    return list(out.values())


def fragment_values(seed: int, cores: Sequence[str] = CORES,
                    substituents: Sequence[str] = SUBSTITUENTS) -> dict[str, float]:
    """Random per-fragment contributions, rounded so sums stay exact in decimal."""
    rng = random.Random(seed)
    table = {c: round(rng.uniform(-1.0, 1.0), 3) for c in cores}
    table.update({s: round(rng.uniform(-1.5, 1.5), 3) for s in substituents})
    return table


def additive_value(d: Decorated, table: dict[str, float]) -> float:
    return round(table[d.core] + sum(table[s] for s in d.substituents), 6)


def small_molecules(n: int, seed: int, max_atoms: int = 12) -> list[Molecule]:
    """Decorated molecules with at most ``max_atoms`` heavy atoms."""
    small_cores = [c for c in CORES if len(parse_smiles(c).atoms) <= 8]
    small_subs = [s for s in SUBSTITUENTS if len(parse_smiles(s, allow_dummy=True).atoms) <= 4]
    rng = random.Random(seed)
    out: dict[str, Molecule] = {}
    while len(out) < n:
        d = random_decorated(rng, small_cores, small_subs, max_subs=3)
        if len(d.molecule.atoms) <= max_atoms:
            out.setdefault(d.molecule.canonical_form, d.molecule)
    return list(out.values())


# --- toy preference data for the alignment reference -----------------------

TOY_ALPHABET = "abcdefgh"


def toy_preferences(n: int, seed: int, length: tuple[int, int] = (2, 4)) -> list[dict[str, str]]:
    """Records {x, y_w, y_l}: y_w follows a hidden rule, y_l breaks it.

    The rule: y_w is x shifted one letter forward in the alphabet (cyclic);
    y_l is x shifted backwards.  Both have the length of x.
    """
    rng = random.Random(seed)
    k = len(TOY_ALPHABET)
    out = []
    for _ in range(n):
        x = "".join(rng.choice(TOY_ALPHABET) for _ in range(rng.randint(*length)))
        y_w = "".join(TOY_ALPHABET[(TOY_ALPHABET.index(c) + 1) % k] for c in x)
        y_l = "".join(TOY_ALPHABET[(TOY_ALPHABET.index(c) - 1) % k] for c in x)
        out.append({"x": x, "y_w": y_w, "y_l": y_l})
    return out


# --- bundled files ----------------------------------------------------------

CORPUS_SEED = 20240611
TOY_SEED = 7
RQ1_SEED = 11
MCS_SEED = 5
PREF_SEED = 3


def write_bundle(outdir: str | Path) -> dict[str, int]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}

    big = random_corpus(1000, CORPUS_SEED, max_subs=3)
    (out / "corpus_1k.smi").write_text("".join(d.molecule.canonical_form + "\n" for d in big))
    counts["corpus_1k.smi"] = len(big)

    toy = family_corpus(10, 20, TOY_SEED, sites_per_family=4, max_changes=1,
                        substituents=SERIES_SUBSTITUENTS, cores=SERIES_CORES)
    (out / "toy_200.smi").write_text("".join(d.molecule.canonical_form + "\n" for d in toy))
    counts["toy_200.smi"] = len(toy)

    rq1 = family_corpus(10, 80, RQ1_SEED, sites_per_family=5,
                        substituents=SERIES_SUBSTITUENTS, cores=SERIES_CORES)
    table = fragment_values(RQ1_SEED, SERIES_CORES, SERIES_SUBSTITUENTS)
    (out / "rq1_corpus.smi").write_text("".join(d.molecule.canonical_form + "\n" for d in rq1))
    lines = ["smiles\tadditive"] + [f"{d.molecule.canonical_form}\t{additive_value(d, table)!r}" for d in rq1]
    (out / "rq1_scores.tsv").write_text("\n".join(lines) + "\n")
    counts["rq1_corpus.smi"] = len(rq1)

    small = small_molecules(24, MCS_SEED)
    (out / "mcs_fixture.smi").write_text("".join(m.canonical_form + "\n" for m in small))
    counts["mcs_fixture.smi"] = len(small)

    prefs = toy_preferences(50, PREF_SEED)
    held = toy_preferences(40, PREF_SEED + 1000)
    for name, recs in (("toy_prefs.jsonl", prefs), ("toy_prefs_heldout.jsonl", held)):
        (out / name).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in recs))
        counts[name] = len(recs)
    return counts


def main(argv: Sequence[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description="Regenerate the bundled synthetic data files.")
    ap.add_argument("outdir", nargs="?", default=str(Path(__file__).parent / "data"))
    args = ap.parse_args(argv)
    for name, n in write_bundle(args.outdir).items():
        print(f"{name}\t{n}")


if __name__ == "__main__":
    main()
