"""Circular (ECFP-style) fingerprints and Tanimoto similarity.

Atom codes start from a hash of the atom invariant (atomic number, formal
charge, heavy degree, hydrogen count, aromatic flag, ring membership).  Each
iteration ``r`` replaces an atom's code with a hash of
``(r, previous code, sorted (bond order, neighbour previous code) pairs)``.
Every code from every iteration 0..radius is folded into the bit vector as
``code % width``.

The 64-bit hash is a splitmix64 finaliser chained over the integer
sequence, so bits are identical on every platform and Python version.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from scpt.errors import WidthMismatch
from scpt.molgraph import Molecule

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SEED = 0x5C9F7A31D2E4B680

DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 2048


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def hash_ints(values: Iterable[int]) -> int:
    """Order-sensitive 64-bit hash of a sequence of (possibly negative) ints."""
    h = _SEED
    for v in values:
        h = splitmix64(h ^ (v & MASK64))
    return h


def atom_invariant(mol: Molecule, i: int) -> tuple[int, ...]:
    a = mol.atoms[i]
    in_ring = any(mol.bonds[k].in_ring for _, k in mol.neighbors(i))
    return (a.atomic_number, a.charge, mol.degree(i), a.hydrogen_count, int(a.aromatic), int(in_ring))


def ecfp_codes(mol: Molecule, radius: int = DEFAULT_RADIUS) -> set[int]:
    """Unfolded set of 64-bit environment codes for iterations 0..radius."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    codes = [hash_ints(atom_invariant(mol, i)) for i in range(len(mol.atoms))]
    out = set(codes)
    for r in range(1, radius + 1):
        nxt = []
        for i in range(len(mol.atoms)):
            env = sorted((int(mol.bonds[k].order), codes[j]) for j, k in mol.neighbors(i))
            seq = [r, codes[i]]
            for order, code in env:
                seq.append(order)
                seq.append(code)
            nxt.append(hash_ints(seq))
        codes = nxt
        out.update(codes)
    return out


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = DEFAULT_WIDTH
    radius: int = DEFAULT_RADIUS
    popcount: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.width < 64 or self.width & (self.width - 1):
            raise ValueError(f"width must be a power of two >= 64, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits do not fit in width")
        object.__setattr__(self, "popcount", self.bits.bit_count())

    @classmethod
    def from_indices(cls, indices: Iterable[int], width: int = DEFAULT_WIDTH,
                     radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        bits = 0
        for i in indices:
            if not 0 <= i < width:
                raise ValueError(f"bit index {i} outside width {width}")
            bits |= 1 << i
        return cls(bits, width, radius)

    def on_bits(self) -> list[int]:
        out, b, i = [], self.bits, 0
        while b:
            low = b & -b
            i = low.bit_length() - 1
            out.append(i)
            b ^= low
        return out

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes(self.width // 8, "little")

    @classmethod
    def from_bytes(cls, data: bytes, width: int, radius: int) -> "Fingerprint":
        if len(data) != width // 8:
            raise ValueError("byte length does not match width")
        return cls(int.from_bytes(data, "little"), width, radius)


def ecfp(mol: Molecule, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> Fingerprint:
    if width < 64:
        raise ValueError("width must be >= 64")
    bits = 0
    for code in ecfp_codes(mol, radius):
        bits |= 1 << (code % width)
    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    both = (a.bits & b.bits).bit_count()
    union = a.popcount + b.popcount - both
    if union == 0:
        return 1.0
    return both / union


class FingerprintCache:
    """Memoises fingerprints by canonical form for one (radius, width) setting."""

    def __init__(self, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> None:
        self.radius = radius
        self.width = width
        self._store: dict[str, Fingerprint] = {}

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, key: str) -> bool:
        return key in self._store

    def get(self, mol: Molecule) -> Fingerprint:
        key = mol.canonical_form
        fp = self._store.get(key)
        if fp is None:
            fp = ecfp(mol, self.radius, self.width)
            self._store[key] = fp
        return fp

    def similarity(self, a: Molecule, b: Molecule) -> float:
        return tanimoto(self.get(a), self.get(b))

    def items(self):
        return self._store.items()

    def update(self, entries: Mapping[str, Fingerprint]) -> None:
        for key, fp in entries.items():
            if fp.width != self.width or fp.radius != self.radius:
                raise WidthMismatch("cached fingerprint parameters differ from cache settings")
            self._store[key] = fp


# --- binary cache file ------------------------------------------------------

CACHE_MAGIC = b"SCFP"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sHHI")  # magic, version, radius, width
_LEN = struct.Struct("<I")


def write_cache(path: str | Path, entries: Mapping[str, Fingerprint], radius: int, width: int) -> None:
    """Write fingerprints sorted by canonical form, so files are byte-stable."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, radius, width))
        for key in sorted(entries):
            fp = entries[key]
            if fp.width != width or fp.radius != radius:
                raise WidthMismatch(f"entry {key!r} has width {fp.width}, radius {fp.radius}")
            raw = key.encode("utf-8")
            fh.write(_LEN.pack(len(raw)))
            fh.write(raw)
            fh.write(fp.to_bytes())


def read_cache(path: str | Path) -> tuple[dict[str, Fingerprint], int, int]:
    """Return (entries, radius, width)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated fingerprint cache header")
    magic, version, radius, width = _HEADER.unpack_from(data, 0)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise ValueError(f"{path}: not a fingerprint cache (magic {magic!r}, version {version})")
    pos = _HEADER.size
    nbytes = width // 8
    out: dict[str, Fingerprint] = {}
    while pos < len(data):
        if pos + _LEN.size > len(data):
            raise ValueError(f"{path}: truncated record at byte {pos}")
        (n,) = _LEN.unpack_from(data, pos)
        pos += _LEN.size
        end = pos + n + nbytes
        if end > len(data):
            raise ValueError(f"{path}: truncated record at byte {pos}")
        key = data[pos : pos + n].decode("utf-8")
        out[key] = Fingerprint.from_bytes(data[pos + n : end], width, radius)
        pos = end
    return out, radius, width
