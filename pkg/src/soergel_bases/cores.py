"""Interval combinatorics of reduced words and the move tuples built from them.

Positions are 1-based, as for integer intervals [[a, b]].  A move acts at a
0-based offset i: it touches slots i+1, ..., i+size of the word, so a core
[[a, b]] is touched by moves at offset a - 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .coxeter import CoxeterSystem, Word, covering_circuit, require_reduced
from .errors import CoverageFailure, SoergelError


@dataclass(frozen=True, eq=False)
class Interval:
    a: int
    b: int

    @property
    def empty(self) -> bool:
        return self.a > self.b

    def _key(self):
        return None if self.empty else (self.a, self.b)

    def __eq__(self, other):
        return isinstance(other, Interval) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        return (self._key() or (0, -1)) < (other._key() or (0, -1))

    def __len__(self):
        return 0 if self.empty else self.b - self.a + 1

    def __contains__(self, i):
        return self.a <= i <= self.b

    def issubset(self, other: "Interval") -> bool:
        return self.empty or (not other.empty and other.a <= self.a and self.b <= other.b)

    def __str__(self):
        return "∅" if self.empty else f"[[{self.a},{self.b}]]"

    __repr__ = __str__

    def to_json(self):
        return None if self.empty else [self.a, self.b]


EMPTY = Interval(1, 0)


def _maximal(intervals: Iterable[Interval]) -> list[Interval]:
    items = set(intervals)
    out = [I for I in items if not any(I != J and I.issubset(J) for J in items)]
    return sorted(out) if out else [EMPTY]


def t_intervals(word: Sequence[int]) -> list[Interval]:
    """Maximal integer intervals I with r_i = r_{i+2} whenever i, i+2 ∈ I."""
    n = len(word)
    if n == 0:
        return [EMPTY]
    found = []
    for i in range(1, n + 1):
        j = i
        while j + 1 <= n and (j + 1 - 2 < i or word[j + 1 - 3] == word[j + 1 - 1]):
            j += 1
        found.append(Interval(i, j))
    return _maximal(found)


def alternates(word: Sequence[int], I: Interval) -> bool:
    return all(word[i - 1] == word[i + 1] for i in range(I.a, I.b - 1))


@dataclass
class CoreDecomposition:
    word: Word
    A: list[Interval]
    gcores: list[Interval]
    elgcores: list[Interval]
    cores: list[Interval]
    classification: dict[Interval, str]
    pairs: dict[Interval, tuple[int, int]]  # alternating pair of the window around each gcore

    def to_json(self, system: CoxeterSystem | None = None) -> dict:
        def name(i):
            return system.names[i] if system is not None else i

        return {
            "word": system.format_word(self.word) if system is not None else list(self.word),
            "A": [I.to_json() for I in self.A],
            "gcores": [I.to_json() for I in self.gcores],
            "elgcores": [I.to_json() for I in self.elgcores],
            "cores": [I.to_json() for I in self.cores],
            "classification": [{"core": C.to_json(), "kind": self.classification[C]} for C in self.cores],
            "pairs": [{"gcore": C.to_json(), "pair": [name(p) for p in self.pairs[C]]} for C in self.gcores],
        }


def a_of_x(system: CoxeterSystem, x) -> list[Interval]:
    """Maximal elements of the union of T(r) over all reduced words r of x."""
    return _a_with_sources(system, x)[0]


def _a_with_sources(system: CoxeterSystem, x):
    x = system.element(x)
    sources: dict[Interval, set] = {}
    for r in system.rex_set(x):
        for I in t_intervals(r):
            if not I.empty:
                sources.setdefault(I, set()).add(r)
    A = _maximal(sources)
    return A, sources


def core_decomposition(system: CoxeterSystem, word) -> CoreDecomposition:
    word = tuple(system.parse_word(word))
    require_reduced(system, word)
    A, sources = _a_with_sources(system, word)
    gcores, pairs = [], {}
    for I in A:
        if I.empty:
            continue
        G = Interval(I.a + 1, I.b - 1)
        if G.empty:
            continue
        gcores.append(G)
        # the pair comes from a reduced word in which the window alternates
        r = min(sources[I])
        pairs[G] = (r[G.a - 1], r[G.a]) if len(G) >= 2 else (r[G.a - 2], r[G.a - 1])
    elg = [C for C in gcores if C.b - C.a >= 1]
    cores = [C for C in elg if system.m(*pairs[C]) == C.b - C.a + 3]
    n = len(word)

    def letter(i):
        return word[i - 1] if 1 <= i <= n else None

    def same(i, j):
        a, b = letter(i), letter(j)
        return a is not None and a == b

    cls = {}
    for C in cores:
        left_eq = same(C.a - 1, C.a + 1)
        right_eq = same(C.b - 1, C.b + 1)
        if left_eq and right_eq:
            cls[C] = "filled"
        elif left_eq:
            cls[C] = "right"
        elif right_eq:
            cls[C] = "left"
        else:
            cls[C] = "empty"
    return CoreDecomposition(word, A, sorted(gcores), sorted(elg), sorted(cores), cls, pairs)


@dataclass(frozen=True)
class Move:
    kind: str  # "braid" or "jw"
    pos: int  # 0-based offset
    size: int

    def __str__(self):
        return f"{'Braid' if self.kind == 'braid' else 'Jw'}({self.pos},{self.size})"

    def to_json(self):
        return {"kind": self.kind, "pos": self.pos, "size": self.size}


def Braid(pos: int, window: int) -> Move:
    return Move("braid", pos, window)


def Jw(pos: int, size: int) -> Move:
    return Move("jw", pos, size)


@dataclass
class MoveTuple:
    """Moves listed in the order they are applied (first move acts first)."""

    word: Word
    moves: list[Move] = field(default_factory=list)

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def steps(self, system: CoxeterSystem) -> list[tuple[Word, Move, Word]]:
        """(source word, move, target word) for each move; checks applicability."""
        out = []
        w = tuple(self.word)
        for mv in self.moves:
            I = Interval(mv.pos + 1, mv.pos + mv.size)
            if I.b > len(w) or mv.pos < 0 or not alternates(w, I) or len(set(w[mv.pos:mv.pos + mv.size])) > 2:
                raise SoergelError(f"move {mv} does not apply to {system.format_word(w)}")
            if mv.kind == "braid":
                a, b = w[mv.pos], w[mv.pos + 1]
                if system.m(a, b) != mv.size:
                    raise SoergelError(f"move {mv} is not a braid window of {system.format_word(w)}")
                new = system.apply_braid(w, mv.pos, mv.size)
            else:
                if mv.size > 2 and system.m(w[mv.pos], w[mv.pos + 1]) < mv.size:
                    raise SoergelError(f"move {mv} exceeds the bond")
                new = w
            out.append((w, mv, new))
            w = new
        return out

    def final_word(self, system) -> Word:
        st = self.steps(system)
        return st[-1][2] if st else tuple(self.word)

    def to_json(self, system: CoxeterSystem | None = None):
        return {
            "word": system.format_word(self.word) if system is not None else list(self.word),
            "moves": [m.to_json() for m in self.moves],
        }


def n_of(tup: MoveTuple, C: Interval) -> int:
    if C.empty:
        return 0
    return sum(1 for mv in tup.moves if mv.pos == C.a - 2)


def _circuit(system: CoxeterSystem, word: Word, rng: random.Random | None):
    graph = system.rex_graph(system.element(word))
    return covering_circuit(graph, word, rng=rng)


def f_tuple(system: CoxeterSystem, word, rng: random.Random | None = None) -> MoveTuple:
    """Braid moves of a covering circuit of the rex graph, starting at ``word``."""
    word = tuple(system.parse_word(word))
    require_reduced(system, word)
    dec = core_decomposition(system, word)
    walk = _circuit(system, word, rng)
    tup = MoveTuple(word, [Braid(e.pos, e.window) for e in walk])
    missing = [C for C in dec.cores if n_of(tup, C) == 0]
    if missing:
        raise CoverageFailure(f"circuit misses cores {missing}")
    return tup


def gf_tuple(system: CoxeterSystem, word, rng: random.Random | None = None) -> MoveTuple:
    """The f-tuple with one Jw move per ELGcore that is not a core.

    Each Jw move is inserted at the first vertex of the circuit whose word
    alternates on the window around the ELGcore (the start word if possible).
    """
    word = tuple(system.parse_word(word))
    require_reduced(system, word)
    if not system.extra_large:
        raise SoergelError("generalized tuples need an extra-large system")
    dec = core_decomposition(system, word)
    walk = _circuit(system, word, rng)
    vertices = [word] + [e.target for e in walk]
    inserts: dict[int, list[Move]] = {}
    for C in dec.elgcores:
        if C in dec.cores:
            continue
        window = Interval(C.a - 1, C.b + 1)
        for k, v in enumerate(vertices):
            if alternates(v, window):
                inserts.setdefault(k, []).append(Jw(C.a - 2, len(window)))
                break
        else:
            raise CoverageFailure(f"no reduced word alternates on {window}")
    moves: list[Move] = []
    for k in range(len(vertices)):
        moves.extend(inserts.get(k, []))
        if k < len(walk):
            moves.append(Braid(walk[k].pos, walk[k].window))
    tup = MoveTuple(word, moves)
    missing = [C for C in dec.elgcores if n_of(tup, C) == 0]
    if missing:
        raise CoverageFailure(f"tuple misses ELGcores {missing}")
    return tup
