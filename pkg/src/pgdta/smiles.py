"""SMILES parsing into molecular graphs, plus 78-wide atom features.

Supported grammar: organic-subset atoms (B C N O P S F Cl Br I), aromatic
lowercase atoms (b c n o p s), bracket atoms ``[isotope symbol chiral hcount
charge class]`` over the whole periodic table, bonds ``- = # :``, ``/`` and
``\\`` (read as single), branches, ring closures ``0-9`` and ``%nn``.
Stereo marks are accepted and dropped. Aromaticity is taken verbatim from
lowercase notation and never re-perceived.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedMolecule,
    EmptyInput,
    MalformedBracketAtom,
    MisplacedBond,
    NonRingAromatic,
    UnbalancedParentheses,
    UnknownElement,
    UnmatchedRingClosure,
)

ELEMENTS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce "
    "Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn "
    "Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl "
    "Mc Lv Ts Og"
).split()
ATOMIC_NUMBER = {sym: z for z, sym in enumerate(ELEMENTS, start=1)}

ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
AROMATIC_BRACKET = ("se", "as", "te", "b", "c", "n", "o", "p", "s")

# allowed valences, lowest first; implicit H fills up to the first that fits
VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

FEATURE_SYMBOLS = (
    "C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg", "Na", "Ca", "Fe", "As",
    "Al", "I", "B", "V", "K", "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co", "Se", "Ti",
    "Zn", "H", "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr", "Pt",
    "Hg", "Pb", "other",
)
N_FEATURES = len(FEATURE_SYMBOLS) + 11 * 3 + 1  # 78

BOND_ORDERS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic",
               "/": "single", "\\": "single"}
_ORDER_VALUE = {"single": 1, "double": 2, "triple": 3, "aromatic": 1}


@dataclass
class Atom:
    element: str
    atomic_number: int
    formal_charge: int = 0
    aromatic: bool = False
    explicit_h: int = 0
    implicit_h: int = 0
    ring_member: bool = False
    bracket: bool = False

    @property
    def total_h(self):
        return self.explicit_h + self.implicit_h


@dataclass
class Bond:
    a: int
    b: int
    order: str
    ring_member: bool = False


@dataclass
class MolecularGraph:
    atoms: list
    bonds: list
    adjacency: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.adjacency is None:
            self.adjacency = adjacency_from_bonds(len(self.atoms), self.bonds)

    @property
    def n_atoms(self):
        return len(self.atoms)

    def degree(self, i):
        return int(self.adjacency[i].sum())

    def edge_index(self):
        """Directed (src, dst) pairs, both directions of every bond."""
        a = np.array([b.a for b in self.bonds], dtype=np.intp)
        b = np.array([b.b for b in self.bonds], dtype=np.intp)
        return np.concatenate([a, b]), np.concatenate([b, a])


def adjacency_from_bonds(n, bonds):
    adj = np.zeros((n, n), dtype=bool)
    for bond in bonds:
        adj[bond.a, bond.b] = adj[bond.b, bond.a] = True
    return adj


def _parse_bracket(body, pos):
    """Parse the text between ``[`` and ``]`` into an Atom."""
    i, n = 0, len(body)
    while i < n and body[i].isdigit():
        i += 1
    rest = body[i:]
    symbol = None
    for cand in AROMATIC_BRACKET:
        if rest.startswith(cand):
            symbol, aromatic = cand.capitalize(), True
            break
    if symbol is None:
        if rest[:2] in ATOMIC_NUMBER and len(rest) >= 2 and rest[1].islower():
            symbol = rest[:2]
        elif rest[:1] in ATOMIC_NUMBER:
            symbol = rest[:1]
        elif rest[:1].isalpha() and rest[:1].isupper():
            raise UnknownElement(f"unknown element in [{body}]", pos)
        else:
            raise MalformedBracketAtom(f"no element symbol in [{body}]", pos)
        aromatic = False
    i += len(symbol)
    # chirality: @, @@, @TH1, @SP2, @OH12 ...
    if i < n and body[i] == "@":
        i += 1
        if i < n and body[i] == "@":
            i += 1
        elif body[i:i + 2] in ("TH", "AL", "SP", "TB", "OH"):
            i += 2
            while i < n and body[i].isdigit():
                i += 1
    h = 0
    if i < n and body[i] == "H":
        i += 1
        h = 1
        if i < n and body[i].isdigit():
            h = int(body[i])
            i += 1
    charge = 0
    if i < n and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        j = i + 1
        if j < n and body[j].isdigit():
            while j < n and body[j].isdigit():
                j += 1
            charge = sign * int(body[i + 1:j])
        else:
            while j < n and body[j] == body[i]:
                j += 1
            charge = sign * (j - i)
        i = j
    if i < n and body[i] == ":":
        j = i + 1
        while j < n and body[j].isdigit():
            j += 1
        if j == i + 1:
            raise MalformedBracketAtom(f"empty atom class in [{body}]", pos)
        i = j
    if i != n:
        raise MalformedBracketAtom(f"unexpected {body[i]!r} in [{body}]", pos)
    return Atom(symbol, ATOMIC_NUMBER[symbol], formal_charge=charge,
                aromatic=aromatic, explicit_h=h, bracket=True)


def _tokens(text):
    """Yield (kind, value, position) tokens."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise MalformedBracketAtom("unterminated bracket atom", i)
            yield "atom", _parse_bracket(text[i + 1:j], i), i
            i = j + 1
        elif text.startswith(("Cl", "Br"), i):
            sym = text[i:i + 2]
            yield "atom", Atom(sym, ATOMIC_NUMBER[sym]), i
            i += 2
        elif ch in "BCNOPSFI":
            yield "atom", Atom(ch, ATOMIC_NUMBER[ch]), i
            i += 1
        elif ch in AROMATIC_ORGANIC:
            sym = ch.upper()
            yield "atom", Atom(sym, ATOMIC_NUMBER[sym], aromatic=True), i
            i += 1
        elif ch in BOND_ORDERS:
            yield "bond", BOND_ORDERS[ch], i
            i += 1
        elif ch == "(":
            yield "open", None, i
            i += 1
        elif ch == ")":
            yield "close", None, i
            i += 1
        elif ch.isdigit():
            yield "ring", int(ch), i
            i += 1
        elif ch == "%":
            digits = text[i + 1:i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise UnmatchedRingClosure("'%' must be followed by two digits", i)
            yield "ring", int(digits), i
            i += 3
        elif ch == ".":
            raise DisconnectedMolecule("'.' separated fragments are not supported", i)
        elif ch.isalpha() or ch == "*":
            raise UnknownElement(f"unknown atom symbol {ch!r}", i)
        else:
            raise UnknownElement(f"unexpected character {ch!r}", i)


def _implicit_h(atom, bond_sum):
    if atom.bracket or atom.element not in VALENCES:
        return 0
    used = bond_sum
    if atom.aromatic and atom.element in ("B", "C", "N", "P"):
        # the delocalised pi bond takes one valence unit
        used += 1
    # aromatic atoms never take a higher valence state
    allowed = VALENCES[atom.element][:1] if atom.aromatic else VALENCES[atom.element]
    for v in allowed:
        if v >= used:
            return v - used
    return 0


def parse_smiles(text):
    """Parse ``text`` into a :class:`MolecularGraph` with rings perceived."""
    if text is None:
        raise EmptyInput("no SMILES given", 0)
    text = text.strip()
    if not text:
        raise EmptyInput("empty SMILES", 0)
    if not text.isascii():
        raise UnknownElement("non-ASCII character in SMILES", 0)

    atoms, bonds = [], []
    seen_pairs = set()
    branches = []
    rings = {}
    prev = None
    pending = None  # (order, position) of an explicit bond symbol

    def connect(i, j, order, pos):
        if i == j or (min(i, j), max(i, j)) in seen_pairs:
            raise UnmatchedRingClosure(f"ring closure would duplicate bond {i}-{j}", pos)
        if order is None:
            order = "aromatic" if atoms[i].aromatic and atoms[j].aromatic else "single"
        seen_pairs.add((min(i, j), max(i, j)))
        bonds.append(Bond(min(i, j), max(i, j), order))

    for kind, value, pos in _tokens(text):
        if kind == "atom":
            atoms.append(value)
            idx = len(atoms) - 1
            if prev is not None:
                connect(prev, idx, pending[0] if pending else None, pos)
            elif pending:
                raise MisplacedBond("bond symbol with nothing to attach to", pending[1])
            pending = None
            prev = idx
        elif kind == "bond":
            if pending is not None or prev is None:
                raise MisplacedBond("misplaced bond symbol", pos)
            pending = (value, pos)
        elif kind == "open":
            if pending is not None:
                raise MisplacedBond("bond symbol before '('", pending[1])
            if prev is None:
                raise UnbalancedParentheses("branch opened without an anchor atom", pos)
            branches.append((prev, pos))
        elif kind == "close":
            if pending is not None:
                raise MisplacedBond("bond symbol before ')'", pending[1])
            if not branches:
                raise UnbalancedParentheses("unbalanced ')'", pos)
            prev = branches.pop()[0]
        elif kind == "ring":
            if prev is None:
                raise UnmatchedRingClosure("ring label before any atom", pos)
            order = pending[0] if pending else None
            pending = None
            if value in rings:
                other, other_order, _ = rings.pop(value)
                if order and other_order and order != other_order:
                    raise UnmatchedRingClosure(f"conflicting bond orders on ring {value}", pos)
                connect(other, prev, order or other_order, pos)
            else:
                rings[value] = (prev, order, pos)

    if pending is not None:
        raise MisplacedBond("dangling bond symbol", pending[1])
    if branches:
        raise UnbalancedParentheses("unclosed '('", branches[-1][1])
    if rings:
        label, (_, _, pos) = next(iter(rings.items()))
        raise UnmatchedRingClosure(f"ring label {label} never closed", pos)

    bond_sum = [0] * len(atoms)
    for bond in bonds:
        bond_sum[bond.a] += _ORDER_VALUE[bond.order]
        bond_sum[bond.b] += _ORDER_VALUE[bond.order]
    for k, atom in enumerate(atoms):
        atom.implicit_h = _implicit_h(atom, bond_sum[k])

    graph = perceive_rings(MolecularGraph(atoms, bonds))
    for k, atom in enumerate(graph.atoms):
        if atom.aromatic and not atom.ring_member:
            raise NonRingAromatic(f"aromatic atom {k} is not in a ring", None)
    return graph


def _bridges(n, neighbours):
    """Bridge edges as (min, max) pairs, via iterative low-link DFS."""
    disc = [-1] * n
    low = [0] * n
    found = set()
    clock = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = clock
        clock += 1
        stack = [(root, -1, iter(neighbours[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if disc[w] < 0:
                    disc[w] = low[w] = clock
                    clock += 1
                    stack.append((w, v, iter(neighbours[w])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    found.add((min(parent, v), max(parent, v)))
    return found


def perceive_rings(graph):
    """Mark every atom and bond lying on a cycle.

    A bond is a ring bond iff it is not a bridge; an atom is a ring atom iff
    it touches a ring bond. Mutates and returns ``graph``.
    """
    n = graph.n_atoms
    neighbours = [[] for _ in range(n)]
    for bond in graph.bonds:
        neighbours[bond.a].append(bond.b)
        neighbours[bond.b].append(bond.a)
    bridges = _bridges(n, neighbours)
    for atom in graph.atoms:
        atom.ring_member = False
    for bond in graph.bonds:
        bond.ring_member = (bond.a, bond.b) not in bridges
        if bond.ring_member:
            graph.atoms[bond.a].ring_member = True
            graph.atoms[bond.b].ring_member = True
    return graph


def _one_hot(value, width):
    v = np.zeros(width)
    v[min(value, width - 1)] = 1.0
    return v


def atom_features(graph, i):
    atom = graph.atoms[i]
    symbol = atom.element if atom.element in FEATURE_SYMBOLS else "other"
    return np.concatenate([
        _one_hot(FEATURE_SYMBOLS.index(symbol), len(FEATURE_SYMBOLS)),
        _one_hot(graph.degree(i), 11),
        _one_hot(atom.total_h, 11),
        _one_hot(atom.implicit_h, 11),
        [1.0 if atom.aromatic else 0.0],
    ])


def featurize_atoms(graph):
    """(n_atoms, 78) matrix: element, degree, total H, implicit valence, aromatic."""
    if graph.n_atoms == 0:
        return np.zeros((0, N_FEATURES))
    return np.stack([atom_features(graph, i) for i in range(graph.n_atoms)])
