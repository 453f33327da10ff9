"""SMILES reading and writing for the supported subset.

Supported: organic-subset atoms (aromatic lowercase included), bracket atoms
with H count and charge, explicit bonds ``- = # :``, branches, ring closures
(``1``..``9`` and ``%nn``).  Stereo markers (``/ \\ @``) are accepted and
dropped; isotopes and wildcard atoms are rejected unless ``allow_dummy`` is
set (used internally for fragment labels with ``[*]`` placeholders).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from scpt.errors import SmilesSyntaxError, UnsupportedFeature
from scpt.molgraph.core import (
    AROMATIC_BRACKET,
    AROMATIC_ORGANIC,
    ATOMIC_NUMBERS,
    DUMMY,
    ORGANIC_SUBSET,
    VALENCES,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    default_hydrogens,
)
from scpt.molgraph.rings import find_bridges, minimum_cycle_basis

_BRACKET = re.compile(
    r"""
    (?P<isotope>\d+)?
    (?P<element>\*|[A-Z][a-z]?|se|as|[bcnops])
    (?P<chiral>@(?:@|TH[12]|AL[12]|SP[123]|TB\d{1,2}|OH\d{1,2})?)?
    (?P<hcount>H\d?)?
    (?P<charge>[+-](?:\d{1,2}|[+-]*))?
    (?::(?P<aclass>\d+))?
    $""",
    re.VERBOSE,
)

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": None,
    "\\": None,
}


@dataclass
class _RawAtom:
    element: str
    aromatic: bool
    charge: int = 0
    hcount: int | None = None  # None => implicit (organic subset)


def _parse_bracket(body: str, allow_dummy: bool, pos: int) -> _RawAtom:
    m = _BRACKET.match(body)
    if m is None:
        raise SmilesSyntaxError(f"bad bracket atom [{body}] at position {pos}")
    if m.group("isotope"):
        raise UnsupportedFeature(f"isotope in [{body}]")
    element = m.group("element")
    if element == DUMMY and not allow_dummy:
        raise UnsupportedFeature("wildcard atom '*'")
    aromatic = element[0].islower()
    if aromatic:
        element = element.capitalize()
        if element not in AROMATIC_BRACKET:
            raise SmilesSyntaxError(f"element {element} cannot be aromatic")
    elif element != DUMMY and element not in ATOMIC_NUMBERS:
        raise UnsupportedFeature(f"unknown element {element!r}")
    h = m.group("hcount")
    hcount = 0 if not h else (int(h[1:]) if len(h) > 1 else 1)
    c = m.group("charge")
    charge = 0
    if c:
        sign = 1 if c[0] == "+" else -1
        rest = c[1:]
        if rest.isdigit():
            charge = sign * int(rest)
        else:
            charge = sign * (1 + len(rest))
    return _RawAtom(element, aromatic, charge, hcount)


def _tokenize_graph(text: str, allow_dummy: bool):
    atoms: list[_RawAtom] = []
    bonds: list[list] = []  # [a, b, order | None, explicit?]
    components: list[int] = []  # component id per atom
    comp = 0
    prev: int | None = None
    branch_stack: list[int | None] = []
    ring_open: dict[int, tuple[int, BondOrder | None, bool]] = {}
    pending_bond: BondOrder | None = None
    pending_explicit = False
    pairs: set[frozenset[int]] = set()

    def add_bond(a: int, b: int, order, explicit: bool, pos: int) -> None:
        key = frozenset((a, b))
        if a == b or key in pairs:
            raise SmilesSyntaxError(f"duplicate or self bond at position {pos}")
        pairs.add(key)
        bonds.append([a, b, order, explicit])

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError(f"branch opened before any atom at position {i}")
            if pending_explicit:
                raise SmilesSyntaxError(f"bond symbol before '(' at position {i}")
            branch_stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError(f"unbalanced ')' at position {i}")
            if pending_explicit:
                raise SmilesSyntaxError(f"dangling bond before ')' at position {i}")
            prev = branch_stack.pop()
            i += 1
            continue
        if ch in _BOND_SYMBOLS:
            if pending_explicit:
                raise SmilesSyntaxError(f"two bond symbols in a row at position {i}")
            pending_bond = _BOND_SYMBOLS[ch]
            pending_explicit = True
            i += 1
            continue
        if ch == ".":
            if branch_stack:
                raise SmilesSyntaxError(f"'.' inside a branch at position {i}")
            if pending_explicit or prev is None:
                raise SmilesSyntaxError(f"misplaced '.' at position {i}")
            comp += 1
            prev = None
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if ch == "%":
                digits = text[i + 1 : i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesSyntaxError(f"bad ring number at position {i}")
                num = int(digits)
                i += 3
            else:
                num = int(ch)
                i += 1
            if prev is None:
                raise SmilesSyntaxError(f"ring closure before any atom at position {i}")
            if num in ring_open:
                other, order, explicit = ring_open.pop(num)
                if pending_explicit and explicit and pending_bond != order:
                    raise SmilesSyntaxError(f"conflicting ring-closure bonds for {num}")
                if pending_explicit:
                    order, explicit = pending_bond, True
                add_bond(other, prev, order, explicit, i)
            else:
                ring_open[num] = (prev, pending_bond, pending_explicit)
            pending_bond, pending_explicit = None, False
            continue

        # atom
        if ch == "[":
            close = text.find("]", i)
            if close == -1:
                raise SmilesSyntaxError(f"unclosed '[' at position {i}")
            atom = _parse_bracket(text[i + 1 : close], allow_dummy, i)
            i = close + 1
        elif ch == "*":
            if not allow_dummy:
                raise UnsupportedFeature("wildcard atom '*'")
            atom = _RawAtom(DUMMY, False, 0, 0)
            i += 1
        else:
            two = text[i : i + 2]
            if two in ("Cl", "Br"):
                atom = _RawAtom(two, False)
                i += 2
            elif ch in ORGANIC_SUBSET:
                atom = _RawAtom(ch, False)
                i += 1
            elif ch.upper() in AROMATIC_ORGANIC and ch.islower():
                atom = _RawAtom(ch.upper(), True)
                i += 1
            elif ch == "]":
                raise SmilesSyntaxError(f"unbalanced ']' at position {i}")
            else:
                raise SmilesSyntaxError(f"unexpected character {ch!r} at position {i}")
        idx = len(atoms)
        atoms.append(atom)
        components.append(comp)
        if prev is not None:
            add_bond(prev, idx, pending_bond, pending_explicit, i)
        elif pending_explicit:
            raise SmilesSyntaxError(f"bond symbol with no preceding atom at position {i}")
        pending_bond, pending_explicit = None, False
        prev = idx

    if branch_stack:
        raise SmilesSyntaxError("unbalanced '(' at end of input")
    if ring_open:
        raise SmilesSyntaxError(f"dangling ring closure(s) {sorted(ring_open)}")
    if pending_explicit:
        raise SmilesSyntaxError("dangling bond symbol at end of input")
    if not atoms:
        raise SmilesSyntaxError("no atoms in SMILES")
    return atoms, bonds, components


def _resolve_orders(atoms: list[_RawAtom], bonds: list[list]) -> list[BondOrder]:
    edges = [(b[0], b[1]) for b in bonds]
    bridges = find_bridges(len(atoms), edges)
    orders = []
    for k, (a, b, order, explicit) in enumerate(bonds):
        if order is None:
            both_aromatic = atoms[a].aromatic and atoms[b].aromatic
            order = BondOrder.AROMATIC if both_aromatic and k not in bridges else BondOrder.SINGLE
        orders.append(order)
    return orders


def _assign_hydrogens(atoms: list[_RawAtom], edges, orders) -> list[int]:
    bond_sum = [0] * len(atoms)
    for (a, b), order in zip(edges, orders):
        bond_sum[a] += order.valence
        bond_sum[b] += order.valence
    hs = []
    for i, atom in enumerate(atoms):
        if atom.hcount is not None:
            hs.append(atom.hcount)
        else:
            hs.append(default_hydrogens(atom.element, atom.aromatic, bond_sum[i]))
    return hs


def _aromatize(atoms: list[_RawAtom], edges, orders: list[BondOrder], hs: list[int]) -> None:
    """Convert Kekulé rings that pass a Hückel 4n+2 count to aromatic form in place."""
    if not any(o is BondOrder.DOUBLE for o in orders):
        return
    rings = minimum_cycle_basis(len(atoms), edges)
    if not rings:
        return
    bond_index = {frozenset(e): k for k, e in enumerate(edges)}
    incident: list[list[int]] = [[] for _ in atoms]
    for k, (a, b) in enumerate(edges):
        incident[a].append(k)
        incident[b].append(k)

    ring_bonds = []
    for ring in rings:
        ks = [bond_index[frozenset((ring[j], ring[(j + 1) % len(ring)]))] for j in range(len(ring))]
        ring_bonds.append(set(ks))

    done = [False] * len(rings)
    changed = True
    while changed:
        changed = False
        for r, ring in enumerate(rings):
            if done[r] or not 5 <= len(ring) <= 7:
                continue
            if all(atoms[a].aromatic for a in ring):
                done[r] = True
                continue
            electrons = 0
            ok = True
            for a in ring:
                contrib = _pi_electrons(a, atoms, edges, orders, hs, incident[a], ring_bonds[r])
                if contrib is None:
                    ok = False
                    break
                electrons += contrib
            if ok and electrons % 4 == 2:
                done[r] = True
                changed = True
                for a in ring:
                    atoms[a].aromatic = True
                for k in ring_bonds[r]:
                    orders[k] = BondOrder.AROMATIC


def _pi_electrons(a, atoms, edges, orders, hs, incident, ring_bond_set) -> int | None:
    atom = atoms[a]
    if atom.element not in AROMATIC_ORGANIC:
        return None
    in_ring_double = any(orders[k] is BondOrder.DOUBLE for k in incident if k in ring_bond_set)
    in_ring_arom = any(orders[k] is BondOrder.AROMATIC for k in incident if k in ring_bond_set)
    if in_ring_double or in_ring_arom:
        return 1
    if any(orders[k] is BondOrder.TRIPLE for k in incident):
        return None
    if any(orders[k] is BondOrder.AROMATIC for k in incident):
        return 1
    exo_double = [k for k in incident if orders[k] is BondOrder.DOUBLE]
    if exo_double:
        k = exo_double[0]
        other = edges[k][0] if edges[k][1] == a else edges[k][1]
        if atoms[other].element in ("O", "N", "S") and atom.element == "C":
            return 0
        return None
    if atom.element in ("N", "P") and atom.charge == 0:
        return 2
    if atom.element in ("O", "S") and atom.charge == 0:
        return 2
    if atom.element == "C" and atom.charge == -1:
        return 2
    if atom.element == "C" and atom.charge == 1:
        return 0
    return None


def _build(atoms: list[_RawAtom], edges, orders, hs, keep: Sequence[int] | None = None,
           allow_disconnected: bool = False) -> Molecule:
    idx = list(range(len(atoms))) if keep is None else list(keep)
    remap = {old: new for new, old in enumerate(idx)}
    out_atoms = [
        Atom(atoms[i].element, atoms[i].charge, atoms[i].aromatic, hs[i], n)
        for n, i in enumerate(idx)
    ]
    out_bonds = [
        Bond(remap[a], remap[b], order)
        for (a, b), order in zip(edges, orders)
        if a in remap and b in remap
    ]
    return Molecule(out_atoms, out_bonds, allow_disconnected=allow_disconnected)


def _parse_all(text: str, allow_dummy: bool):
    text = text.strip()
    if not text:
        raise SmilesSyntaxError("empty SMILES")
    atoms, bonds, components = _tokenize_graph(text, allow_dummy)
    edges = [(b[0], b[1]) for b in bonds]
    orders = _resolve_orders(atoms, bonds)
    hs = _assign_hydrogens(atoms, edges, orders)
    _aromatize(atoms, edges, orders, hs)
    return atoms, edges, orders, hs, components


def parse_smiles(text: str, *, allow_dummy: bool = False) -> Molecule:
    """Parse a single-component SMILES string into a Molecule."""
    atoms, edges, orders, hs, components = _parse_all(text, allow_dummy)
    if components[-1] != 0:
        raise UnsupportedFeature("multi-component SMILES ('.'); use parse_components to split")
    return _build(atoms, edges, orders, hs)


def parse_components(text: str, *, allow_dummy: bool = False) -> list[Molecule]:
    """Parse a possibly dot-separated SMILES into one Molecule per component."""
    atoms, edges, orders, hs, components = _parse_all(text, allow_dummy)
    out = []
    for c in range(components[-1] + 1):
        keep = [i for i, ci in enumerate(components) if ci == c]
        out.append(_build(atoms, edges, orders, hs, keep))
    return out


# --- writing --------------------------------------------------------------

def _atom_token(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    if atom.is_dummy:
        return "[*]"
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.charge == 0 and atom.element in ORGANIC_SUBSET and (
        not atom.aromatic or atom.element in AROMATIC_ORGANIC
    ):
        try:
            implicit = default_hydrogens(atom.element, atom.aromatic, mol.bond_sum(i))
        except Exception:
            implicit = None
        if implicit == atom.hydrogen_count:
            return symbol
    token = "[" + symbol
    if atom.hydrogen_count:
        token += "H" if atom.hydrogen_count == 1 else f"H{atom.hydrogen_count}"
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        token += sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}"
    return token + "]"


def _bond_token(mol: Molecule, bond: Bond) -> str:
    a, b = mol.atoms[bond.begin], mol.atoms[bond.end]
    both_aromatic = a.aromatic and b.aromatic
    if bond.order is BondOrder.SINGLE:
        return "-" if both_aromatic else ""
    if bond.order is BondOrder.DOUBLE:
        return "="
    if bond.order is BondOrder.TRIPLE:
        return "#"
    return "" if both_aromatic and bond.in_ring else ":"


def _ring_label(num: int) -> str:
    return str(num) if num < 10 else f"%{num:02d}"


def write_smiles(mol: Molecule, priority: Sequence[int] | None = None) -> tuple[str, list[int]]:
    """Write ``mol`` as SMILES, traversing atoms in ``priority`` order.

    The walk starts at the atom with the smallest priority and visits
    neighbours in ascending priority.  Returns the string and the atom
    order in which atoms appear in it.
    """
    n = len(mol.atoms)
    prio = list(range(n)) if priority is None else list(priority)
    nbrs = [sorted(mol.neighbors(i), key=lambda t: prio[t[0]]) for i in range(n)]

    # pass 1: DFS tree and ring-closure bonds
    visited = [False] * n
    order: list[int] = []
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closures: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    tree_bonds: set[int] = set()
    start = min(range(n), key=lambda i: prio[i])
    roots = [start] + sorted((i for i in range(n) if i != start), key=lambda i: prio[i])
    components: list[int] = []
    for root in roots:
        if visited[root]:
            continue
        components.append(root)
        stack = [(root, -1, iter(nbrs[root]))]
        visited[root] = True
        order.append(root)
        while stack:
            node, via, it = stack[-1]
            advanced = False
            for nbr, k in it:
                if k == via:
                    continue
                if visited[nbr]:
                    if k not in tree_bonds and (nbr, k) not in closures[node]:
                        closures[node].append((nbr, k))
                        closures[nbr].append((node, k))
                    continue
                visited[nbr] = True
                tree_bonds.add(k)
                children[node].append((nbr, k))
                order.append(nbr)
                stack.append((nbr, k, iter(nbrs[nbr])))
                advanced = True
                break
            if not advanced:
                stack.pop()

    position = {a: p for p, a in enumerate(order)}

    # pass 2: emit
    out: list[str] = []
    free_digits: list[int] = []
    next_digit = 1
    open_digit: dict[int, int] = {}

    def take_digit() -> int:
        nonlocal next_digit
        if free_digits:
            free_digits.sort()
            return free_digits.pop(0)
        d = next_digit
        next_digit += 1
        return d

    def emit(root: int) -> None:
        stack: list = [("atom", root, -1)]
        while stack:
            kind, a, k_in = stack.pop()
            if kind == "text":
                out.append(a)
                continue
            if k_in >= 0:
                out.append(_bond_token(mol, mol.bonds[k_in]))
            out.append(_atom_token(mol, a))
            # closing digits first (partner already written), then openings
            closing = sorted((c for c in closures[a] if position[c[0]] < position[a]),
                             key=lambda c: position[c[0]])
            opening = sorted((c for c in closures[a] if position[c[0]] > position[a]),
                             key=lambda c: position[c[0]])
            for _, k in closing:
                d = open_digit.pop(k)
                out.append(_ring_label(d))
                free_digits.append(d)
            for _, k in opening:
                d = take_digit()
                open_digit[k] = d
                out.append(_bond_token(mol, mol.bonds[k]) + _ring_label(d))
            kids = children[a]
            # push in reverse so the first child is emitted first
            frames = []
            for j, (c, k) in enumerate(kids):
                if j < len(kids) - 1:
                    frames.append([("text", "(", -1), ("atom", c, k), ("text", ")", -1)])
                else:
                    frames.append([("atom", c, k)])
            # a branch must be fully emitted before the next sibling: expand lazily
            for frame in reversed(frames):
                if len(frame) == 3:
                    stack.append(("text", ")", -1))
                    stack.append(("atom", frame[1][1], frame[1][2]))
                    stack.append(("text", "(", -1))
                else:
                    stack.append(frame[0])

    for j, root in enumerate(components):
        if j:
            out.append(".")
        emit(root)
    return "".join(out), order


def to_smiles(mol: Molecule, priority: Sequence[int] | None = None) -> str:
    return write_smiles(mol, priority)[0]
