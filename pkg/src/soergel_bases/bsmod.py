"""Bott-Samelson bimodules in the 01-basis and bimodule morphisms between them.

θ_{s_1}⋯θ_{s_n} = R ⊗_{R^{s_1}} R ⊗ ⋯ ⊗_{R^{s_n}} R is a free left R-module
with basis b_ε = 1 ⊗ e_1 ⊗ ⋯ ⊗ e_n, e_i = x_{s_i} if ε_i = 1 else 1.  A basis
index is an int whose bit i is ε_{i+1}.  Right multiplication slides a
polynomial leftwards using R = R^s ⊕ x_s R^s in each slot.

Morphisms are left R-linear, stored column-wise: ``cols[ε]`` is the image of
b_ε as a sparse vector {ε': coefficient}.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import flint

from .coxeter import CoxeterSystem, GroupElement, Word, alternating
from .errors import (NotBimoduleMap, NotIdempotent, SelectionAmbiguous, ShapeMismatch,
                     TruncationInsufficient, ZeroNormalizer, SoergelError)
from .field import FieldElement
from .hecke import LaurentPoly
from .linalg import LinearSystem, field_matrix_to_q
from .polyring import PolyRing


def popcount(i: int) -> int:
    return bin(i).count("1")


def bits(i: int, n: int) -> tuple:
    return tuple((i >> k) & 1 for k in range(n))


def index(eps: Sequence[int]) -> int:
    return sum(1 << k for k, e in enumerate(eps) if e)


class BSModule:
    """θ_{word}; the empty word is R itself."""

    def __init__(self, ring: PolyRing, word: Sequence[int]):
        self.ring = ring
        self.word: Word = tuple(word)
        self.n = len(self.word)
        self.size = 1 << self.n
        self._lock = threading.RLock()
        self._rho: dict = {}
        self._labels = None
        self._factors = None

    def __eq__(self, other):
        return isinstance(other, BSModule) and self.word == other.word and self.ring is other.ring

    def __hash__(self):
        return hash(("bs", self.word))

    def __repr__(self):
        return f"BSModule({self.ring.system.format_word(self.word) or 'R'})"

    def deg(self, i: int) -> int:
        return 2 * popcount(i)

    def basis(self) -> range:
        return range(self.size)

    def slot(self, k: int, bit: int):
        """Content of slot k+1 of b_ε when ε_{k+1} = bit."""
        return self.ring.x[self.word[k]] if bit else self.ring.one

    def normal_form(self, slots: Sequence) -> dict[int, object]:
        """Left coefficients of p_0 ⊗ p_1 ⊗ ⋯ ⊗ p_n in the basis b_ε."""
        if len(slots) != self.n + 1:
            raise ShapeMismatch("slot count must be word length + 1")
        ring = self.ring
        state = [(0, ring.one)]
        for k in range(self.n, 0, -1):
            nxt = []
            s = self.word[k - 1]
            for b, carry in state:
                content = ring.mul(slots[k], carry)
                P, D = ring.invariant_decompose(s, content)
                if not P.is_zero():
                    nxt.append((b, P))
                if not D.is_zero():
                    nxt.append((b | (1 << (k - 1)), D))
            state = nxt
        out: dict[int, object] = {}
        for b, carry in state:
            c = ring.mul(slots[0], carry)
            if not c.is_zero():
                out[b] = c
        return out

    def right_act(self, i: int, p) -> dict[int, object]:
        """b_ε · p as a sparse vector."""
        if p.is_zero():
            return {}
        if self.n == 0:
            return {0: p}
        ring = self.ring
        slots = [ring.one] + [self.slot(k, (i >> k) & 1) for k in range(self.n)]
        slots[-1] = ring.mul(slots[-1], p)
        return self.normal_form(slots)

    def rho(self, p, key=None) -> dict[int, dict[int, object]]:
        """Right multiplication by p as a sparse matrix (columns)."""
        key = key if key is not None else str(p)
        with self._lock:
            hit = self._rho.get(key)
        if hit is None:
            hit = {i: self.right_act(i, p) for i in range(self.size)}
            with self._lock:
                self._rho[key] = hit
        return hit

    def act_vector(self, vec: dict[int, object], p, key=None) -> dict[int, object]:
        """(Σ c_ε b_ε)·p."""
        R = self.rho(p, key)
        return mat_vec(self.ring, R, vec)

    # localisation

    def labels(self) -> list[GroupElement]:
        """w(ε) = s_1^{ε_1}⋯s_n^{ε_n} for each basis index."""
        if self._labels is None:
            W = self.ring.system
            lab = [W.identity]
            for k, s in enumerate(self.word):
                lab = lab + [W.mul_gen(x, s) for x in lab]
            self._labels = lab
        return self._labels

    def factors(self) -> list[list]:
        """factors[k][prefix] = w(prefix)(x_{s_{k+1}}), prefix over the first k letters."""
        if self._factors is None:
            ring = self.ring
            W = ring.system
            out = []
            lab = [W.identity]
            for k, s in enumerate(self.word):
                out.append([ring.act(x, ring.x[s]) for x in lab])
                lab = lab + [W.mul_gen(x, s) for x in lab]
            self._factors = out
        return self._factors

    def localize(self, vec: dict[int, object]) -> list:
        """Components of Σ c_ε b_ε in ⊕_ε R_{w(ε)} (the map to the fraction-field splitting)."""
        ring = self.ring
        a = [vec.get(i, ring.zero) for i in range(self.size)]
        F = self.factors()
        for k in range(self.n):
            bit = 1 << k
            mask = bit - 1
            for j in range(self.size):
                if j & bit:
                    continue
                hi = a[j | bit]
                if hi.is_zero():
                    a[j | bit] = a[j]
                    continue
                t = ring.mul(F[k][j & mask], hi)
                lo = a[j]
                a[j] = lo + t
                a[j | bit] = lo - t
        return a


class StandardTarget:
    """R_x: R with right action twisted by x."""

    def __init__(self, ring: PolyRing, x: GroupElement):
        self.ring = ring
        self.x = ring.system.element(x)
        self.size = 1
        self.n = 0
        self.word = None
        self._rho: dict = {}

    def __eq__(self, other):
        return isinstance(other, StandardTarget) and self.x == other.x

    def __hash__(self):
        return hash(("std", self.x))

    def __repr__(self):
        return f"StandardTarget({self.x})"

    def deg(self, i: int) -> int:
        return 0

    def basis(self):
        return range(1)

    def right_act(self, i: int, p):
        q = self.ring.act(self.x, p)
        return {} if q.is_zero() else {0: q}

    def rho(self, p, key=None):
        key = key if key is not None else str(p)
        hit = self._rho.get(key)
        if hit is None:
            hit = {0: self.right_act(0, p)}
            self._rho[key] = hit
        return hit

    def act_vector(self, vec, p, key=None):
        return mat_vec(self.ring, self.rho(p, key), vec)


def mat_vec(ring, cols: dict[int, dict[int, object]], vec: dict[int, object]) -> dict[int, object]:
    out: dict[int, object] = {}
    for j, c in vec.items():
        col = cols.get(j)
        if not col:
            continue
        for i, a in col.items():
            t = ring.mul(a, c)
            if i in out:
                out[i] = out[i] + t
            else:
                out[i] = t
    return {i: a for i, a in out.items() if not a.is_zero()}


class BSMorphism:
    """Left R-linear map between modules, with a declared degree."""

    def __init__(self, ring: PolyRing, src, tgt, degree: int, cols: dict[int, dict[int, object]]):
        self.ring = ring
        self.src = src
        self.tgt = tgt
        self.degree = degree
        self.cols = {j: {i: a for i, a in col.items() if not a.is_zero()} for j, col in cols.items()}
        self.cols = {j: c for j, c in self.cols.items() if c}

    @classmethod
    def identity(cls, ring, module) -> "BSMorphism":
        return cls(ring, module, module, 0, {i: {i: ring.one} for i in module.basis()})

    @classmethod
    def zero(cls, ring, src, tgt, degree=0) -> "BSMorphism":
        return cls(ring, src, tgt, degree, {})

    def entry(self, i: int, j: int):
        return self.cols.get(j, {}).get(i, self.ring.zero)

    def column(self, j: int) -> dict[int, object]:
        return self.cols.get(j, {})

    def __call__(self, vec: dict[int, object]) -> dict[int, object]:
        return mat_vec(self.ring, self.cols, vec)

    def compose(self, other: "BSMorphism") -> "BSMorphism":
        """self ∘ other."""
        if other.tgt != self.src:
            raise ShapeMismatch(f"cannot compose {self.src!r} <- {other.tgt!r}")
        cols = {j: mat_vec(self.ring, self.cols, col) for j, col in other.cols.items()}
        return BSMorphism(self.ring, other.src, self.tgt, self.degree + other.degree, cols)

    def __matmul__(self, other):
        return self.compose(other)

    def _check_shape(self, other):
        if self.src != other.src or self.tgt != other.tgt:
            raise ShapeMismatch("morphisms have different source or target")

    def __add__(self, other: "BSMorphism") -> "BSMorphism":
        self._check_shape(other)
        cols = {j: dict(c) for j, c in self.cols.items()}
        for j, col in other.cols.items():
            d = cols.setdefault(j, {})
            for i, a in col.items():
                d[i] = d[i] + a if i in d else a
        return BSMorphism(self.ring, self.src, self.tgt, self.degree, cols)

    def __neg__(self):
        return self.scale(self.ring.field(-1))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BSMorphism":
        ring = self.ring
        cp = c if not isinstance(c, (FieldElement, int)) else ring.const(c)
        return BSMorphism(ring, self.src, self.tgt, self.degree,
                          {j: {i: ring.mul(a, cp) for i, a in col.items()} for j, col in self.cols.items()})

    def __eq__(self, other):
        if not isinstance(other, BSMorphism):
            return NotImplemented
        if self.src != other.src or self.tgt != other.tgt:
            return False
        keys = set(self.cols) | set(other.cols)
        for j in keys:
            a, b = self.cols.get(j, {}), other.cols.get(j, {})
            if set(a) != set(b):
                return False
            if any(not (a[i] - b[i]).is_zero() for i in a):
                return False
        return True

    def __hash__(self):
        return id(self)

    def is_zero(self) -> bool:
        return not self.cols

    def is_homogeneous(self) -> bool:
        ring = self.ring
        for j, col in self.cols.items():
            for i, a in col.items():
                want = self.src.deg(j) - self.tgt.deg(i) + self.degree
                if not ring.is_homogeneous(a, want):
                    return False
        return True

    def nnz(self) -> int:
        return sum(len(c) for c in self.cols.values())

    def to_json(self) -> dict:
        W = self.ring.system

        def name(M):
            if isinstance(M, StandardTarget):
                return {"standard": W.format_word(M.x.word)}
            return W.format_word(M.word)

        return {
            "source": name(self.src),
            "target": name(self.tgt),
            "degree": self.degree,
            "entries": [{"row": i, "col": j, "value": self.ring.format(a)}
                        for j in sorted(self.cols) for i, a in sorted(self.cols[j].items())],
        }


class BSContext:
    """Modules, generators and cached constructions over one polynomial ring."""

    def __init__(self, ring: PolyRing):
        self.ring = ring
        self.system: CoxeterSystem = ring.system
        self._lock = threading.RLock()
        self._modules: dict = {}
        self._fsr: dict = {}
        self._f2: dict = {}

    def module(self, word) -> BSModule:
        word = tuple(self.system.parse_word(word)) if not isinstance(word, tuple) else word
        with self._lock:
            hit = self._modules.get(word)
            if hit is None:
                hit = BSModule(self.ring, word)
                self._modules[word] = hit
        return hit

    def standard(self, x) -> StandardTarget:
        return StandardTarget(self.ring, self.system.element(x))

    def identity(self, word) -> BSMorphism:
        return BSMorphism.identity(self.ring, self.module(word))

    # generators

    def m_gen(self, s: int) -> BSMorphism:
        """θ_s → R, p ⊗ q ↦ pq."""
        ring = self.ring
        return BSMorphism(ring, self.module((s,)), self.module(()), 0, {0: {0: ring.one}, 1: {0: ring.x[s]}})

    def j_gen(self, s: int) -> BSMorphism:
        """θ_sθ_s → θ_s, p ⊗ q ⊗ r ↦ p ∂_s(q) ⊗ r (degree −2)."""
        ring = self.ring
        return BSMorphism(ring, self.module((s, s)), self.module((s,)), -2,
                          {index((1, 0)): {0: ring.one}, index((1, 1)): {1: ring.one}})

    def alpha_gen(self, s: int) -> BSMorphism:
        """R → θ_sθ_s, 1 ↦ x_s ⊗ 1 ⊗ 1 + 1 ⊗ 1 ⊗ x_s (degree 2)."""
        ring = self.ring
        return BSMorphism(ring, self.module(()), self.module((s, s)), 2,
                          {0: {index((0, 0)): ring.x[s], index((0, 1)): ring.one}})

    # tensor products with identities

    def tensor_expand(self, prefix, g: BSMorphism, suffix) -> BSMorphism:
        """id_{prefix} ⊗ g ⊗ id_{suffix}."""
        prefix, suffix = tuple(prefix), tuple(suffix)
        if isinstance(g.src, StandardTarget) or isinstance(g.tgt, StandardTarget):
            raise ShapeMismatch("tensor_expand needs Bott-Samelson source and target")
        if not prefix and not suffix:
            return g
        a = len(prefix)
        P = self.module(prefix)
        src = self.module(prefix + g.src.word + suffix)
        tgt = self.module(prefix + g.tgt.word + suffix)
        nb, nt = g.src.n, g.tgt.n
        cols: dict[int, dict[int, object]] = {}
        for beta in range(g.src.size):
            gcol = g.column(beta)
            for alpha in range(P.size):
                block: dict[int, object] = {}
                for beta2, c in gcol.items():
                    for alpha2, d in P.right_act(alpha, c).items():
                        block[alpha2 | (beta2 << a)] = d
                if not block:
                    continue
                for gamma in range(1 << len(suffix)):
                    j = alpha | (beta << a) | (gamma << (a + nb))
                    cols[j] = {i | (gamma << (a + nt)): d for i, d in block.items()}
        return BSMorphism(self.ring, src, tgt, g.degree, cols)

    def tensor(self, g: BSMorphism, h: BSMorphism) -> BSMorphism:
        """g ⊗ h = (g ⊗ id) ∘ (id ⊗ h)."""
        left = self.tensor_expand(g.src.word, h, ())
        right = self.tensor_expand((), g, h.tgt.word)
        return right.compose(left)

    # bimodule certificate

    def verify_bimodule(self, g: BSMorphism, check_degree: bool = True) -> bool:
        ring = self.ring
        if check_degree and not g.is_homogeneous():
            return False
        for j in range(ring.nvars):
            p, key = ring.y[j], f"y{j}"
            rs = g.src.rho(p, key)
            for col in g.src.basis():
                lhs = g(rs.get(col, {}))
                rhs = g.tgt.act_vector(g.column(col), p, key)
                if set(lhs) != set(rhs) or any(not (lhs[i] - rhs[i]).is_zero() for i in lhs):
                    return False
        return True

    def require_bimodule(self, g: BSMorphism):
        if not self.verify_bimodule(g):
            raise NotBimoduleMap("morphism does not commute with the right action")

    # f_sr

    def f_sr(self, s: int, r: int) -> BSMorphism:
        """The normalized degree-zero morphism θ_sθ_r⋯ → θ_rθ_s⋯ (m factors each)."""
        key = (s, r)
        with self._lock:
            hit = self._fsr.get(key)
        if hit is not None:
            return hit
        out = self._build_fsr(s, r)
        with self._lock:
            self._fsr[key] = out
        return out

    def raw_f_sr(self, s: int, r: int) -> BSMorphism:
        return self._build_fsr(s, r, normalize=False)

    def _build_fsr(self, s: int, r: int, normalize: bool = True) -> BSMorphism:
        ring = self.ring
        m = self.system.m(s, r)
        data = ring.dihedral_data(s, r)
        src_word, tgt_word = alternating(s, r, m), alternating(r, s, m)
        src, tgt = self.module(src_word), self.module(tgt_word)
        images = {w: tgt.right_act(0, data.dual[w]) for w in data.elements}
        cols: dict[int, dict[int, object]] = {}
        for eps in range(src.size):
            col: dict[int, object] = {}
            for w in data.elements:
                a = data.basis[w]
                for k in range(m - 1, -1, -1):
                    a = ring.mul(src.slot(k, (eps >> k) & 1), a)
                    a = ring.demazure(src_word[k], a)
                    if a.is_zero():
                        break
                if a.is_zero():
                    continue
                for i, c in images[w].items():
                    t = ring.mul(a, c)
                    col[i] = col[i] + t if i in col else t
            cols[eps] = col
        f = BSMorphism(ring, src, tgt, 0, cols)
        if not normalize:
            return f
        top = src.size - 1
        c = ring.constant_term(f.entry(top, top))
        if c.is_zero():
            raise ZeroNormalizer("all-ones coefficient of f_sr vanishes")
        return f.scale(c.inverse())

    # Hom spaces

    def hom_degree(self, src_word, target, degree: int, constraint: BSMorphism | None = None
                   ) -> list[BSMorphism]:
        """A field basis of the degree-``degree`` bimodule maps θ_{src} → target."""
        return HomSolver(self, src_word, target, constraint).basis(degree)

    def hom_basis(self, src_word, target, constraint: BSMorphism | None = None,
                  truncation: int | None = None, expected_rank: int | None = None):
        return HomSolver(self, src_word, target, constraint).graded(truncation, expected_rank)

    # idempotents

    def f2(self, s: int, r: int, n: int) -> BSMorphism:
        key = (s, r, n)
        with self._lock:
            hit = self._f2.get(key)
        if hit is not None:
            return hit
        out = self._build_f2(s, r, n)
        with self._lock:
            self._f2[key] = out
        return out

    def _build_f2(self, s: int, r: int, n: int) -> BSMorphism:
        m = self.system.m(s, r)
        if not 1 <= n <= m:
            raise SoergelError(f"f2 needs 1 <= n <= m(s,r) = {m}")
        word = alternating(s, r, n)
        if n <= 2:
            return self.identity(word)
        basis = self.hom_degree(word, self.module(word), 0)
        return central_idempotent(self, basis)


def central_idempotent(ctx: BSContext, basis: list[BSMorphism]) -> BSMorphism:
    """The unique e in span(basis) with a∘e = e∘a = χ(a)e for all a and χ(e) = 1.

    χ(a) is the scalar by which a acts on the multiplicity-one top summand,
    read off from the (0, 0) entry (a degree-zero endomorphism preserves b_0
    up to a constant).
    """
    ring = ctx.ring
    F = ring.field
    k = len(basis)
    chi = [ring.scalar_of(a.entry(0, 0)) for a in basis]
    # unknowns c_j; equations for each i:  Σ c_j (a_i a_j − χ_i a_j) = 0 and Σ c_j (a_j a_i − χ_i a_j) = 0
    sysm = LinearSystem(ring, k)
    for i, ai in enumerate(basis):
        for j, aj in enumerate(basis):
            left = ai.compose(aj) - aj.scale(chi[i])
            right = aj.compose(ai) - aj.scale(chi[i])
            for tag, g in (("L", left), ("R", right)):
                for col, vec in g.cols.items():
                    for row, p in vec.items():
                        sysm.add((tag, i, col, row), j, p)
    for j in range(k):
        if chi[j]:
            sysm.add(("norm",), j, ring.const(chi[j]))
    sysm.add_rhs(("norm",), ring.one)
    try:
        sol = sysm.solve_unique()
    except ValueError as exc:
        raise SelectionAmbiguous(f"central idempotent not unique: {exc}") from exc
    e = BSMorphism.zero(ring, basis[0].src, basis[0].tgt, 0)
    for c, a in zip(sol, basis):
        if c:
            e = e + a.scale(c)
    if e.compose(e) != e:
        raise NotIdempotent("selected element is not idempotent")
    return e


class HomSolver:
    """Degreewise solver for bimodule maps θ_{src} → N.

    A map out of M ⊗_{R^t} R (t the last letter of src) is determined by the
    R-(R^t)-bimodule map on M = θ_{src minus t}, with b_{(ε,1)} ↦ φ(b_{(ε,0)})·x_t.
    Right R^t-linearity is imposed on the generators y_j (j ≠ t) and x_t².
    """

    def __init__(self, ctx: BSContext, src_word, target, constraint: BSMorphism | None = None):
        self.ctx = ctx
        ring = self.ring = ctx.ring
        self.src_word = tuple(src_word)
        self.src = ctx.module(self.src_word)
        if isinstance(target, (tuple, list)):
            target = ctx.module(tuple(target))
        self.tgt = target
        self.constraint = constraint
        if constraint is not None and (constraint.src != self.src or constraint.tgt != self.src):
            raise ShapeMismatch("constraint must be an endomorphism of the source")
        if self.src_word:
            t = self.src_word[-1]
            self.t = t
            self.M = ctx.module(self.src_word[:-1])
            self.gens = [(ring.y[j], f"y{j}") for j in range(ring.nvars) if j != t]
            self.gens.append((ring.mul(ring.x[t], ring.x[t]), f"xx{t}"))
        else:
            self.t = None
            self.M = ctx.module(())
            self.gens = [(ring.y[j], f"y{j}") for j in range(ring.nvars)]

    def _unknowns(self, degree: int):
        out = []
        for e in self.M.basis():
            for d in self.tgt.basis():
                h = self.M.deg(e) + degree - self.tgt.deg(d)
                if h < 0 or h % 2:
                    continue
                for mon in self.ring.monomials(h // 2):
                    out.append((e, d, mon))
        return out

    def _system(self, degree: int):
        ring = self.ring
        unknowns = self._unknowns(degree)
        sysm = LinearSystem(ring, len(unknowns))
        rhoM = {key: self.M.rho(p, key) for p, key in self.gens}
        rhoN = {key: self.tgt.rho(p, key) for p, key in self.gens}
        # rows of rho^M: for each source column e2, entries rho[e][e2] -> equation at e2 for unknown at e
        rowsM = {}
        for key, R in rhoM.items():
            rows: dict[int, list] = {}
            for e2, col in R.items():
                for e, a in col.items():
                    rows.setdefault(e, []).append((e2, a))
            rowsM[key] = rows
        for j, (e, d, mon) in enumerate(unknowns):
            for p, key in self.gens:
                for e2, a in rowsM[key].get(e, ()):
                    sysm.add((key, e2, d), j, ring.mul(a, mon))
                for d2, b in rhoN[key].get(d, {}).items():
                    sysm.add((key, e, d2), j, -ring.mul(b, mon))
        if self.constraint is not None:
            self._add_constraint(sysm, unknowns)
        return sysm, unknowns

    def _phi_columns(self, e, d, mon):
        """Contribution of one unknown to φ(b_ε) for all ε: {ε: {δ: poly}}."""
        out = {}
        if self.t is None:
            out[e] = {d: mon}
            return out
        n1 = self.M.n
        out[e] = {d: mon}
        xt = self.ring.x[self.t]
        out[e | (1 << n1)] = self.tgt.act_vector({d: mon}, xt, f"x{self.t}")
        return out

    def _add_constraint(self, sysm, unknowns):
        ring = self.ring
        E = self.constraint
        # φ∘e − φ = 0: column ε gets Σ_{ε1} e[ε1, ε] φ(b_{ε1}) − φ(b_ε)
        rows: dict[int, list] = {}
        for eps, col in E.cols.items():
            for eps1, a in col.items():
                rows.setdefault(eps1, []).append((eps, a))
        for j, (e, d, mon) in enumerate(unknowns):
            for eps1, vec in self._phi_columns(e, d, mon).items():
                for eps, a in rows.get(eps1, ()):
                    for d2, c in vec.items():
                        sysm.add(("e", eps, d2), j, ring.mul(a, c))
                for d2, c in vec.items():
                    sysm.add(("e", eps1, d2), j, -c)

    def dimension(self, degree: int) -> int:
        sysm, unknowns = self._system(degree)
        if not unknowns:
            return 0
        return sysm.nullity()

    def basis(self, degree: int) -> list[BSMorphism]:
        sysm, unknowns = self._system(degree)
        if not unknowns:
            return []
        out = []
        ring = self.ring
        for vec in sysm.nullspace():
            cols: dict[int, dict[int, object]] = {}
            for c, (e, d, mon) in zip(vec, unknowns):
                if not c:
                    continue
                cc = ring.const(c)
                for eps, v in self._phi_columns(e, d, mon).items():
                    col = cols.setdefault(eps, {})
                    for d2, p in v.items():
                        t = ring.mul(cc, p)
                        col[d2] = col[d2] + t if d2 in col else t
            out.append(BSMorphism(ring, self.src, self.tgt, degree, cols))
        return out

    def min_degree(self) -> int:
        lo = min(self.M.deg(e) for e in self.M.basis())
        hi = max(self.M.deg(e) for e in self.M.basis())
        tmin = min(self.tgt.deg(d) for d in self.tgt.basis())
        return tmin - hi if self.src_word else tmin - lo

    def expected_rank(self) -> int:
        """Rank over R: Σ_x (mult of K_x in the source)·(mult in the target)."""
        src_counts = k_blocks_full(self.src) if self.constraint is None else k_blocks(self.ctx, self.constraint)
        tgt_counts = ({self.tgt.x: 1} if isinstance(self.tgt, StandardTarget) else k_blocks_full(self.tgt))
        return sum(c * tgt_counts.get(x, 0) for x, c in src_counts.items())

    def graded(self, truncation: int | None = None, expected_rank: int | None = None):
        """(dims by degree, generator counts by degree, rk-bar as LaurentPoly).

        Generator counts come from the Hilbert series of R by greedy deduction;
        solving stops once the expected rank is reached.
        """
        ring = self.ring
        if expected_rank is None:
            expected_rank = self.expected_rank()
        if truncation is None:
            truncation = 2 * len(self.src_word) + 8
        kmin = self.min_degree()
        dims, gens = {}, {}
        found = 0
        k = kmin
        while found < expected_rank:
            if k > truncation:
                raise TruncationInsufficient(
                    f"found rank {found} of {expected_rank} up to degree {truncation}")
            dk = self.dimension(k)
            dims[k] = dk
            pred = sum(c * ring.dim(k - k2) for k2, c in gens.items())
            r = dk - pred
            if r < 0:
                raise SoergelError(f"Hom space is not free: negative generator count at degree {k}")
            if r:
                gens[k] = r
                found += r
            k += 2 if (k - kmin) % 2 == 0 else 1
        if found != expected_rank:
            raise SoergelError(f"generator count {found} exceeds expected rank {expected_rank}")
        rk_bar = LaurentPoly({d: c for d, c in gens.items()})
        return HomResult(dims, gens, rk_bar, truncation)


@dataclass
class HomResult:
    dims: dict[int, int]
    generators: dict[int, int]
    rk_bar: LaurentPoly  # Σ (count) v^{degree}
    truncation: int

    @property
    def min_degree(self):
        return min(self.generators) if self.generators else None


# localisation and ranks


def k_blocks_full(module) -> dict[GroupElement, int]:
    if isinstance(module, StandardTarget):
        return {module.x: 1}
    out: dict[GroupElement, int] = {}
    for x in module.labels():
        out[x] = out.get(x, 0) + 1
    return out


def _generic_point(ring: PolyRing, module: BSModule, rng: random.Random):
    """Rational point where no localization factor vanishes."""
    F = ring.field
    while True:
        pt = [F(rng.randint(-97, 97)) for _ in range(ring.nvars)]
        if all(not ring.evaluate(f, pt).is_zero() for row in module.factors() for f in row):
            return pt


def _field_transform(module: BSModule, fac, vec: list, inverse: bool = False) -> list:
    a = list(vec)
    n = module.n
    half = module.ring.field(flint.fmpq(1, 2))
    stages = range(n - 1, -1, -1) if inverse else range(n)
    for k in stages:
        bit = 1 << k
        mask = bit - 1
        for j in range(module.size):
            if j & bit:
                continue
            f = fac[k][j & mask]
            u0, u1 = a[j], a[j | bit]
            if inverse:
                a[j] = (u0 + u1) * half
                a[j | bit] = (u0 - u1) * half / f
            else:
                t = f * u1
                a[j] = u0 + t
                a[j | bit] = u0 - t
    return a


def k_blocks(ctx: BSContext, e: BSMorphism, seed: int = 0) -> dict[GroupElement, int]:
    """Multiplicity of each K_x in the image of an idempotent endomorphism over K.

    Computed as the trace of the x-block of Φ e Φ^{-1} at a generic rational
    point; the trace of an idempotent block is its (constant) rank.
    """
    ring = ctx.ring
    module = e.src
    if e.src != e.tgt:
        raise ShapeMismatch("k_blocks needs an endomorphism")
    rng = random.Random(seed)
    pt = _generic_point(ring, module, rng)
    F = ring.field
    fac = [[ring.evaluate(f, pt) for f in row] for row in module.factors()]
    evals = {j: {i: ring.evaluate(a, pt) for i, a in col.items()} for j, col in e.cols.items()}
    labels = module.labels()
    out: dict[GroupElement, int] = {}
    for eps in range(module.size):
        unit = [F.zero] * module.size
        unit[eps] = F.one
        col = _field_transform(module, fac, unit, inverse=True)
        img = [F.zero] * module.size
        for j, c in enumerate(col):
            if not c:
                continue
            for i, a in evals.get(j, {}).items():
                img[i] = img[i] + a * c
        val = _field_transform(module, fac, img)[eps]
        x = labels[eps]
        out[x] = out.get(x, F.zero) + val
    res = {}
    for x, v in out.items():
        if not v.is_rational() or v.rational().q != 1:
            raise NotIdempotent(f"block trace {v} at {x} is not an integer")
        iv = int(v.rational().p)
        if iv:
            res[x] = iv
    return res


def graded_rank_image(ctx: BSContext, e: BSMorphism, check: bool = True) -> LaurentPoly:
    """Graded dimension of Im(e)/Im(e)R_+ from the degree-matched constant blocks."""
    ring = ctx.ring
    if e.degree != 0 or e.src != e.tgt:
        raise NotIdempotent("graded_rank_image needs a degree-zero endomorphism")
    if check and e.compose(e) != e:
        raise NotIdempotent("morphism is not idempotent")
    n = e.src.n
    out = {}
    for j in range(n + 1):
        idx = [i for i in e.src.basis() if popcount(i) == j]
        rows = [[ring.constant_term(e.entry(i, c)) for c in idx] for i in idx]
        if not idx:
            continue
        rank = field_matrix_to_q(rows, ring.field).rank() // ring.field.degree
        if rank:
            out[-2 * j] = rank
    return LaurentPoly(out)


def stalk_ranks(ctx: BSContext, e: BSMorphism | None, module: BSModule | None = None,
                elements: Iterable[GroupElement] | None = None, strict: bool = True
                ) -> dict[GroupElement, LaurentPoly | None]:
    """rk-bar of Hom(Im e, R_x) for every x, from minimal generators of the x-stalk.

    The image of Im(e) in the x-components of the localization is an R-module
    B_x ⊆ R^k.  When its minimal number of generators equals its rank k it
    is free and contributes Σ v^{-deg} over the generator degrees.  Otherwise
    raises SoergelError, or with ``strict=False`` reports None for that x so
    the caller can fall back to Hom solving.
    """
    ring = ctx.ring
    if module is None:
        module = e.src
    labels = module.labels()
    cols = e.cols if e is not None else {i: {i: ring.one} for i in module.basis()}
    loc = {j: module.localize(col) for j, col in cols.items()}
    groups: dict[GroupElement, list[int]] = {}
    for eps, x in enumerate(labels):
        groups.setdefault(x, []).append(eps)
    targets = list(groups) if elements is None else [module.ring.system.element(x) for x in elements]
    ranks = k_blocks(ctx, e) if e is not None else {x: len(c) for x, c in groups.items()}
    out = {}
    for x in targets:
        comps = groups.get(x, [])
        if not comps or not ranks.get(x):
            continue
        vecs = []
        for j, v in loc.items():
            vv = [v[i] for i in comps]
            if any(not p.is_zero() for p in vv):
                vecs.append((module.deg(j), vv))
        try:
            out[x] = _free_generators(ring, vecs, ranks[x])
        except SoergelError:
            if strict:
                raise
            out[x] = None
    return out


def _free_generators(ring: PolyRing, vecs, k: int) -> LaurentPoly:
    """Generator degrees of the R-span of homogeneous vectors in R^k (must be free of rank ≤ k)."""
    d = ring.field.degree
    by_deg: dict[int, list] = {}
    for D, v in vecs:
        by_deg.setdefault(D, []).append(v)
    if not by_deg:
        return LaurentPoly()
    gens: dict[int, int] = {}
    basis_prev: list[dict] = []  # Q-basis of the span in the previous even degree, as sparse dicts
    prev_D = None
    total = 0
    for D in range(min(by_deg), max(by_deg) + 1, 2):
        span_rows: list[dict] = []
        if prev_D is not None and basis_prev:
            for row in basis_prev:
                for i in range(ring.nvars):
                    span_rows.append(_shift(row, i, ring.nvars))
        base_rank, rows_after = _rank_rows(span_rows)
        new_rows = []
        for v in by_deg.get(D, []):
            p = v
            for kth in range(d):
                if kth:
                    p = [ring.mul(a, ring.th) for a in p]
                new_rows.append(_vec_to_row(p))
        full_rank, basis_rows = _rank_rows(span_rows + new_rows)
        g = (full_rank - base_rank)
        if g % d:
            raise SoergelError("rank over Q not divisible by the field degree")
        g //= d
        if g:
            gens[D] = g
            total += g
        basis_prev = basis_rows
        prev_D = D
    if total != k:
        raise SoergelError(f"stalk needs {total} generators for rank {k}; not certified free")
    return LaurentPoly({-D: c for D, c in gens.items()})


def _vec_to_row(vec) -> dict:
    row = {}
    for comp, p in enumerate(vec):
        for mon, c in zip(p.monoms(), p.coeffs()):
            row[(comp, mon)] = c
    return row


def _shift(row: dict, i: int, nvars: int) -> dict:
    out = {}
    for (comp, mon), c in row.items():
        m = list(mon)
        m[i] += 1
        out[(comp, tuple(m))] = c
    return out


def _rank_rows(rows: list[dict]):
    """Rank over Q and a basis (as sparse rows) of the span."""
    if not rows:
        return 0, []
    keys = sorted({k for r in rows for k in r})
    pos = {k: j for j, k in enumerate(keys)}
    M = flint.fmpq_mat(len(rows), len(keys))
    for i, r in enumerate(rows):
        for k, c in r.items():
            M[i, pos[k]] = c
    R, rank = M.rref()
    basis = []
    for i in range(rank):
        row = {}
        for j in range(len(keys)):
            c = R[i, j]
            if c != 0:
                row[keys[j]] = c
        basis.append(row)
    return rank, basis


# submodules


def one_from_left(ctx: BSContext, vec: dict[int, object], s: int) -> bool:
    """All left coefficients are s-invariant (membership in 1 ⊗_{R^s} θ_{...})."""
    ring = ctx.ring
    return all(ring.demazure(s, p).is_zero() for p in vec.values())


def bottom_tensor(ctx: BSContext, module: BSModule, vec: dict[int, object], s: int,
                  truncation: int | None = None) -> bool:
    """Membership in R^s ⊗ 1 ⊗ ⋯ ⊗ 1 ⊗ R, i.e. Σ a_i (b_0·c_i) with a_i s-invariant."""
    ring = ctx.ring
    if not vec:
        return True
    degs = {module.deg(i) + (ring.degree(p) or 0) for i, p in vec.items()}
    if len(degs) != 1:
        raise SoergelError("vector is not homogeneous")
    D = degs.pop()
    if truncation is not None and D > truncation:
        raise TruncationInsufficient(f"degree {D} beyond budget {truncation}")
    terms = []
    for hc in range(D // 2 + 1):
        for c in ring.monomials(hc):
            img = module.right_act(0, c)
            for a in ring.monomials(D // 2 - hc):
                inv = ring.invariant_decompose(s, a)[0]
                if inv.is_zero():
                    continue
                terms.append({i: ring.mul(inv, p) for i, p in img.items()})
    sysm = LinearSystem(ring, len(terms))
    for j, t in enumerate(terms):
        for i, p in t.items():
            sysm.add(i, j, p)
    for i, p in vec.items():
        sysm.add_rhs(i, p)
    return sysm.solve_any() is not None


def closed_formula_f2_3(ctx: BSContext, s: int, r: int) -> BSMorphism:
    """id − (2∂_s(x_r))^{-1} (id⊗m_r⊗id²)(id⊗α_r⊗id)(id⊗j_s)(α_s⊗id) j_s (id⊗m_r⊗id)."""
    ring = ctx.ring
    g = ctx.tensor_expand((s,), ctx.m_gen(r), (s,))  # θsθrθs → θsθs
    g = ctx.j_gen(s).compose(g)  # → θs
    g = ctx.tensor_expand((), ctx.alpha_gen(s), (s,)).compose(g)  # → θsθsθs
    g = ctx.tensor_expand((s,), ctx.j_gen(s), ()).compose(g)  # → θsθs
    g = ctx.tensor_expand((s,), ctx.alpha_gen(r), (s,)).compose(g)  # → θsθrθrθs
    g = ctx.tensor_expand((s,), ctx.m_gen(r), (r, s)).compose(g)  # → θsθrθs
    c = ring.scalar_of(ring.demazure(s, ring.x[r])) * 2
    return ctx.identity((s, r, s)) - g.scale(c.inverse())


def adjunction_map(ctx: BSContext, f: BSMorphism, s: int) -> BSMorphism:
    """Hom(Mθ_s, N) → Hom(M, Nθ_s): f ↦ (f ⊗ id_θs) ∘ (id_M ⊗ α_s)."""
    M = f.src.word[:-1]
    if f.src.word[-1] != s:
        raise ShapeMismatch("source must end in s")
    a = ctx.tensor_expand(M, ctx.alpha_gen(s), ())
    b = ctx.tensor_expand((), f, (s,))
    return b.compose(a)
