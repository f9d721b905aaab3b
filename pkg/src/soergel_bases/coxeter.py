"""Coxeter systems with exact geometric representations.

Group elements are identified by their matrices in the geometric
representation V = span{α_s}, where s acts by v ↦ v − 2B(α_s, v)α_s and
B(α_s, α_r) = −cos(π/m(s,r)).  The representation is faithful, so equal
matrices mean equal elements.  Lengths come from root tracking: ℓ(ws) > ℓ(w)
exactly when w(α_s) is a positive root.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    BondTooSmall,
    DiagonalNotOne,
    FieldMissingConstant,
    InfiniteBondUnsupported,
    NonSymmetric,
    NotExtraLarge,
    NotReduced,
    SoergelError,
)
from .field import FieldElement, NumberField

Word = tuple  # tuple of generator indices


@dataclass(frozen=True, eq=False)
class GroupElement:
    key: tuple
    length: int
    word: Word
    system: "CoxeterSystem" = field(repr=False, compare=False)

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return (self.length, self.word) < (other.length, other.word)

    def __repr__(self):
        return f"GroupElement({self.system.format_word(self.word) or 'e'})"

    def __str__(self):
        return self.system.format_word(self.word) or "e"

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.system.multiply(self, other)

    def inverse(self) -> "GroupElement":
        return self.system.element(tuple(reversed(self.word)))

    def is_identity(self) -> bool:
        return self.length == 0


@dataclass(frozen=True)
class BraidEdge:
    """A braid move at 0-based offset ``pos`` turning ``source`` into ``target``."""

    source: Word
    pos: int
    target: Word
    pair: tuple[int, int]
    window: int


@dataclass
class RexGraph:
    element: GroupElement
    vertices: list[Word]
    edges: list[BraidEdge]

    def neighbours(self, u: Word) -> list[BraidEdge]:
        return [e for e in self.edges if e.source == u]

    def to_dot(self, fmt=None, annotate: dict | None = None) -> str:
        fmt = fmt or (lambda w: "".join(map(str, w)))
        lines = ["graph rex {"]
        for v in self.vertices:
            lines.append(f'  "{fmt(v)}";')
        seen = set()
        for e in self.edges:
            k = frozenset([e.source, e.target]), e.pos
            if k in seen:
                continue
            seen.add(k)
            label = f"{e.pos}"
            if annotate and (e.source, e.pos) in annotate:
                label += f" {annotate[(e.source, e.pos)]}"
            lines.append(f'  "{fmt(e.source)}" -- "{fmt(e.target)}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class CoxeterSystem:
    """A Coxeter system with finite bonds and its geometric representation."""

    def __init__(self, bond, names: Sequence[str] | None = None, field: NumberField | None = None,
                 require_extra_large: bool = False):
        bond = [[_bond_entry(x) for x in row] for row in bond]
        n = len(bond)
        if any(len(row) != n for row in bond):
            raise NonSymmetric("bond matrix is not square")
        for i in range(n):
            if bond[i][i] != 1:
                raise DiagonalNotOne(f"m({i},{i}) = {bond[i][i]}")
            for j in range(n):
                if bond[i][j] != bond[j][i]:
                    raise NonSymmetric(f"m({i},{j}) != m({j},{i})")
                if i != j:
                    if bond[i][j] is None:
                        raise InfiniteBondUnsupported(f"m({i},{j}) = ∞ is not supported")
                    if bond[i][j] < 2:
                        raise BondTooSmall(f"m({i},{j}) = {bond[i][j]} < 2")
        offdiag = [bond[i][j] for i in range(n) for j in range(n) if i != j]
        extra_large = all(m >= 4 for m in offdiag)
        if require_extra_large and not extra_large:
            raise NotExtraLarge("some bond is 2 or 3; the construction needs m(s,r) > 3")
        self.rank = n
        self.bond = tuple(tuple(row) for row in bond)
        self.extra_large = extra_large
        if names is None:
            names = ["s", "r", "t", "u", "v", "w"][:n] if n <= 6 else [f"s{i}" for i in range(n)]
        if len(names) != n or len(set(names)) != n:
            raise SoergelError("generator names must be distinct and match the rank")
        self.names = tuple(names)
        self.field = field if field is not None else NumberField.for_bonds(offdiag)
        for m in set(offdiag):
            if not self.field.has_cos(m):
                raise FieldMissingConstant(f"configured field lacks cos(π/{m})")
        F = self.field
        self.B = [[F.one if i == j else -F.cos_pi(bond[i][j]) for j in range(n)] for i in range(n)]
        self.gen_matrices = [self._reflection_matrix(i) for i in range(n)]
        self._lock = threading.RLock()
        self._elements: dict[tuple, GroupElement] = {}
        self._mul_cache: dict[tuple, GroupElement] = {}
        self._matrix: dict[tuple, list[list[FieldElement]]] = {}
        self._rex_cache: dict[tuple, list[Word]] = {}
        self._interval_cache: dict[tuple, frozenset] = {}
        ident = [[F.one if i == j else F.zero for j in range(n)] for i in range(n)]
        self._e = self._register(ident, 0, ())

    # construction and identity

    @classmethod
    def from_json(cls, data, field: NumberField | None = None, require_extra_large: bool = False):
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["bond"], names=data.get("generators"), field=field,
                   require_extra_large=require_extra_large)

    def to_json(self) -> dict:
        return {"generators": list(self.names), "bond": [list(r) for r in self.bond]}

    def m(self, i: int, j: int) -> int:
        return self.bond[i][j]

    def _reflection_matrix(self, i: int):
        n, F = self.rank, self.field
        M = [[F.one if a == b else F.zero for b in range(n)] for a in range(n)]
        for j in range(n):
            M[i][j] = M[i][j] - self.B[i][j] * 2
        return M

    def _mat_key(self, M) -> tuple:
        return tuple(tuple(e.coeffs()) for row in M for e in row)

    def _register(self, M, length: int, word: Word) -> GroupElement:
        key = self._mat_key(M)
        with self._lock:
            el = self._elements.get(key)
            if el is None:
                el = GroupElement(key, length, tuple(word), self)
                self._elements[key] = el
                self._matrix[key] = M
            return el

    @property
    def identity(self) -> GroupElement:
        return self._e

    def generator(self, i: int) -> GroupElement:
        return self.mul_gen(self._e, i)

    def matrix(self, x: GroupElement):
        return self._matrix[x.key]

    # words

    def parse_word(self, text) -> Word:
        if isinstance(text, (list, tuple)):
            out = []
            for t in text:
                out.append(t if isinstance(t, int) else self.names.index(t))
            return tuple(out)
        text = text.strip()
        if text in ("", "e", "()"):
            return ()
        if " " in text or "," in text:
            toks = [t for t in text.replace(",", " ").split() if t]
            return tuple(self.names.index(t) for t in toks)
        if all(len(nm) == 1 for nm in self.names):
            try:
                return tuple(self.names.index(c) for c in text)
            except ValueError as exc:
                raise SoergelError(f"unknown generator in word {text!r}") from exc
        raise SoergelError(f"cannot parse word {text!r}")

    def format_word(self, word: Iterable[int]) -> str:
        word = tuple(word)
        if all(len(nm) == 1 for nm in self.names):
            return "".join(self.names[i] for i in word)
        return " ".join(self.names[i] for i in word)

    # roots and multiplication

    def _is_positive(self, column) -> bool:
        signs = {self.field.sign(c) for c in column}
        signs.discard(0)
        if signs == {1}:
            return True
        if signs == {-1}:
            return False
        raise SoergelError("root with mixed signs; the representation is inconsistent")

    def _mat_mul(self, A, Bm):
        n = self.rank
        F = self.field
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = F.zero
                for k in range(n):
                    a = A[i][k]
                    if a:
                        b = Bm[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return out

    def root_image(self, x: GroupElement, i: int):
        """Coordinates of x(α_i) in the simple-root basis."""
        M = self._matrix[x.key]
        return [M[a][i] for a in range(self.rank)]

    def mul_gen(self, x: GroupElement, i: int) -> GroupElement:
        ck = (x.key, i)
        hit = self._mul_cache.get(ck)
        if hit is not None:
            return hit
        M = self._matrix[x.key]
        up = self._is_positive(self.root_image(x, i))
        newM = self._mat_mul(M, self.gen_matrices[i])
        key = self._mat_key(newM)
        with self._lock:
            el = self._elements.get(key)
        if el is None:
            if up:
                el = self._register(newM, x.length + 1, x.word + (i,))
            else:
                el = self._register(newM, x.length - 1, self._delete_letter(x, i))
        with self._lock:
            self._mul_cache[ck] = el
        return el

    def _delete_letter(self, x: GroupElement, i: int) -> Word:
        # exchange condition: x(α_i) = −β_j for the j-th inversion root of x's witness
        target = [-c for c in self.root_image(x, i)]
        prefix = self._e
        for j, t in enumerate(x.word):
            beta = self.root_image(prefix, t)
            if all(a == b for a, b in zip(beta, target)):
                return x.word[:j] + x.word[j + 1:]
            prefix = self.mul_gen(prefix, t)
        raise SoergelError("exchange condition failed")

    def gen_mul(self, i: int, x: GroupElement) -> GroupElement:
        return self.element((i,) + x.word)

    def element(self, word) -> GroupElement:
        if isinstance(word, GroupElement):
            return word
        if isinstance(word, str):
            word = self.parse_word(word)
        x = self._e
        for i in word:
            if not 0 <= i < self.rank:
                raise SoergelError(f"generator index {i} out of range")
            x = self.mul_gen(x, i)
        return x

    def multiply(self, x: GroupElement, y: GroupElement) -> GroupElement:
        for i in y.word:
            x = self.mul_gen(x, i)
        return x

    def length(self, word) -> int:
        return self.element(word).length

    def is_reduced(self, word) -> bool:
        if isinstance(word, str):
            word = self.parse_word(word)
        x = self._e
        for i in word:
            nx = self.mul_gen(x, i)
            if nx.length < x.length:
                return False
            x = nx
        return True

    def descents_right(self, x: GroupElement, i: int) -> bool:
        return self.mul_gen(x, i).length < x.length

    # reduced expressions

    def braid_windows(self, word: Word):
        """Yield (pos, window, pair) for every braid move applicable to the word."""
        n = len(word)
        for pos in range(n):
            a = word[pos]
            if pos + 1 >= n:
                break
            b = word[pos + 1]
            if a == b:
                continue
            m = self.bond[a][b]
            if pos + m > n:
                continue
            if all(word[pos + k] == (a if k % 2 == 0 else b) for k in range(m)):
                yield pos, m, (a, b)

    @staticmethod
    def apply_braid(word: Word, pos: int, window: int) -> Word:
        a, b = word[pos], word[pos + 1]
        new = tuple(b if k % 2 == 0 else a for k in range(window))
        return word[:pos] + new + word[pos + window:]

    def rex_set(self, x) -> list[Word]:
        x = self.element(x)
        with self._lock:
            hit = self._rex_cache.get(x.key)
        if hit is not None:
            return list(hit)
        seen = {x.word}
        stack = [x.word]
        while stack:
            u = stack.pop()
            for pos, m, _ in self.braid_windows(u):
                v = self.apply_braid(u, pos, m)
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        out = sorted(seen)
        with self._lock:
            self._rex_cache[x.key] = out
        return list(out)

    def rex_graph(self, x) -> RexGraph:
        x = self.element(x)
        verts = self.rex_set(x)
        edges = []
        for u in verts:
            for pos, m, pair in self.braid_windows(u):
                edges.append(BraidEdge(u, pos, self.apply_braid(u, pos, m), pair, m))
        return RexGraph(x, verts, edges)

    # Bruhat order

    def lower_interval(self, y) -> frozenset:
        """All x ≤ y, as products of subwords of a reduced word of y."""
        y = self.element(y)
        with self._lock:
            hit = self._interval_cache.get(y.key)
        if hit is not None:
            return hit
        reach = {self._e}
        for i in y.word:
            reach |= {self.mul_gen(u, i) for u in reach}
        out = frozenset(reach)
        with self._lock:
            self._interval_cache[y.key] = out
        return out

    def bruhat_leq(self, x, y) -> bool:
        x, y = self.element(x), self.element(y)
        if x.length > y.length:
            return False
        return x in self.lower_interval(y)

    def elements_up_to(self, max_length: int) -> list[GroupElement]:
        layer = {self._e}
        out = [self._e]
        for _ in range(max_length):
            nxt = set()
            for x in layer:
                for i in range(self.rank):
                    y = self.mul_gen(x, i)
                    if y.length == x.length + 1:
                        nxt.add(y)
            if not nxt:
                break
            layer = nxt
            out.extend(sorted(nxt))
        return out

    def longest_dihedral(self, i: int, j: int) -> Word:
        m = self.bond[i][j]
        return tuple(i if k % 2 == 0 else j for k in range(m))

    def __repr__(self):
        return f"CoxeterSystem({self.to_json()})"


def _bond_entry(x):
    if x is None:
        return None
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞", "oo"):
            return None
        return int(x)
    if isinstance(x, float):
        if x == float("inf"):
            return None
        return int(x)
    return int(x)


def alternating(i: int, j: int, n: int) -> Word:
    """The alternating word i j i ... of length n."""
    return tuple(i if k % 2 == 0 else j for k in range(n))


def build_system(bond_matrix, require_extra_large: bool = True, names=None,
                 field: NumberField | None = None) -> CoxeterSystem:
    return CoxeterSystem(bond_matrix, names=names, field=field, require_extra_large=require_extra_large)


def dihedral(m: int, names=("s", "r"), field: NumberField | None = None) -> CoxeterSystem:
    return CoxeterSystem([[1, m], [m, 1]], names=names, field=field)


def geometric_rep(system: CoxeterSystem):
    return system.gen_matrices


def covering_circuit(graph: RexGraph, start: Word, order: Sequence[Word] | None = None,
                     rng=None) -> list[BraidEdge]:
    """Closed walk from ``start`` through every vertex.

    Depth-first traversal; every tree edge is walked forward and then back.
    ``order`` fixes the neighbour priority (default: sorted vertices);
    ``rng`` shuffles neighbour order instead, for independence checks.
    """
    if start not in graph.vertices:
        raise SoergelError("start word is not a vertex of the graph")
    rank = {v: k for k, v in enumerate(order or sorted(graph.vertices))}
    adj: dict[Word, list[BraidEdge]] = {v: [] for v in graph.vertices}
    for e in graph.edges:
        adj[e.source].append(e)
    for v in adj:
        adj[v].sort(key=lambda e: (rank[e.target], e.pos))
        if rng is not None:
            rng.shuffle(adj[v])
    back = {(e.source, e.target, e.pos): e for e in graph.edges}
    walk: list[BraidEdge] = []
    seen = {start}

    def visit(u):
        for e in adj[u]:
            if e.target in seen:
                continue
            seen.add(e.target)
            walk.append(e)
            visit(e.target)
            walk.append(back[(e.target, e.source, e.pos)])

    visit(start)
    return walk


def all_words(rank: int, max_len: int) -> Iterable[Word]:
    for n in range(max_len + 1):
        yield from itertools.product(range(rank), repeat=n)


def require_reduced(system: CoxeterSystem, word: Word):
    if not system.is_reduced(word):
        raise NotReduced(f"word {system.format_word(word)!r} is not reduced")
