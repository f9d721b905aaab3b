"""The graded polynomial ring R = S(V*) with its W-action and Demazure operators.

Variables y_s are dual to the simple roots, so y_r(α_s) = δ_rs.  Writing
x_s = 2B(α_s, ·) in these coordinates gives s·f = f − f(α_s)·x_s on linear
forms; in particular s fixes y_r for r ≠ s and sends y_s to y_s − x_s.

Polynomials are FLINT ``fmpq_mpoly`` objects in y_0, …, y_{n−1} and, when
the field is not Q, one extra variable θ kept reduced modulo its minimal
polynomial.  The grading counts only the y-exponents (each y has degree 2).

Demazure operators use the splitting p = Σ_k P_k·y_s^k with s-invariant
P_k, together with the closed form
    ∂_s(y_s^k) = ½ Σ_{j<k} y_s^j (s·y_s)^{k−1−j},
so no division is ever performed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import combinations_with_replacement

import flint

from .coxeter import CoxeterSystem, GroupElement, alternating
from .errors import InternalDivisionFailure, NotReduced, SingularPairing
from .field import FieldElement


class PolyRing:
    def __init__(self, system: CoxeterSystem):
        self.system = system
        self.field = system.field
        self.nvars = system.rank
        self.d = self.field.degree
        names = tuple(f"y{i}" for i in range(self.nvars))
        if self.d > 1:
            names = names + ("th",)
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "degrevlex")
        gens = self.ctx.gens()
        self.y = list(gens[: self.nvars])
        self.zero = self.ctx.constant(0)
        self.one = self.ctx.constant(1)
        if self.d > 1:
            self.th = gens[-1]
            self.minpoly = self.ctx.from_dict(
                {tuple([0] * self.nvars + [i]): flint.fmpq(c)
                 for i, c in enumerate(self.field.modulus.coeffs()) if c != 0})
        else:
            self.th = self.one
            self.minpoly = None
        self._lock = threading.RLock()
        self.x = []
        for i in range(self.nvars):
            acc = self.zero
            for j in range(self.nvars):
                acc = acc + self.const(system.B[i][j] * 2) * self.y[j]
            self.x.append(self.reduce(acc))
        # s·y_s = y_s − x_s; the powers are cached per generator
        self._sy = [self.reduce(self.y[i] - self.x[i]) for i in range(self.nvars)]
        self._dem_pow: list[dict[int, flint.fmpq_mpoly]] = [dict() for _ in range(self.nvars)]
        self._act_pow: list[dict[int, flint.fmpq_mpoly]] = [dict() for _ in range(self.nvars)]
        self._subs_cache: dict[tuple, list] = {}
        self._dihedral: dict[tuple[int, int], DihedralData] = {}
        self._monomials: dict[int, list] = {}

    # coefficients

    def const(self, a) -> flint.fmpq_mpoly:
        if not isinstance(a, FieldElement):
            a = self.field(a)
        coeffs = a.c.coeffs()
        if self.d == 1:
            return self.ctx.constant(flint.fmpq(coeffs[0]) if coeffs else 0)
        return self.ctx.from_dict({tuple([0] * self.nvars + [i]): flint.fmpq(c)
                                   for i, c in enumerate(coeffs) if c != 0})

    def reduce(self, p):
        if self.d == 1:
            return p
        return p % self.minpoly

    def mul(self, a, b):
        return self.reduce(a * b)

    def scalar_of(self, p) -> FieldElement:
        """The field element of a constant polynomial."""
        if p.is_zero():
            return self.field.zero
        coeffs = [flint.fmpq(0)] * self.d
        for mon, c in zip(p.monoms(), p.coeffs()):
            if any(mon[: self.nvars]):
                raise ValueError("polynomial is not constant")
            coeffs[mon[-1] if self.d > 1 else 0] = c
        return self.field.from_coeffs(coeffs)

    def ydeg_terms(self, p):
        return [sum(m[: self.nvars]) for m in p.monoms()]

    def degree(self, p) -> int | None:
        """Internal degree (2 per variable) of a homogeneous polynomial; None for 0."""
        if p.is_zero():
            return None
        degs = set(self.ydeg_terms(p))
        if len(degs) != 1:
            raise ValueError("polynomial is not homogeneous")
        return 2 * degs.pop()

    def is_homogeneous(self, p, degree: int | None = None) -> bool:
        if p.is_zero():
            return True
        degs = set(self.ydeg_terms(p))
        if len(degs) != 1:
            return False
        return degree is None or 2 * degs.pop() == degree

    def constant_term(self, p) -> FieldElement:
        out = [flint.fmpq(0)] * self.d
        for mon, c in zip(p.monoms(), p.coeffs()):
            if not any(mon[: self.nvars]):
                out[mon[-1] if self.d > 1 else 0] = c
        return self.field.from_coeffs(out)

    def monomials(self, half_degree: int) -> list:
        """All monomials of polynomial degree ``half_degree`` (internal degree twice that)."""
        if half_degree < 0:
            return []
        hit = self._monomials.get(half_degree)
        if hit is None:
            hit = []
            for combo in combinations_with_replacement(range(self.nvars), half_degree):
                m = self.one
                for i in combo:
                    m = m * self.y[i]
                hit.append(m)
            self._monomials[half_degree] = hit
        return hit

    def dim(self, degree: int) -> int:
        """Dimension over the field of the internal-degree slice R_degree."""
        if degree < 0 or degree % 2:
            return 0
        k, n = degree // 2, self.nvars
        from math import comb
        return comb(k + n - 1, n - 1)

    def evaluate(self, p, point) -> FieldElement:
        """Substitute field values for the y-variables."""
        vals = [self.const(a) for a in point]
        if self.d > 1:
            vals.append(self.th)
        return self.scalar_of(self.reduce(p.compose(*vals, ctx=self.ctx)))

    def format(self, p) -> str:
        if p.is_zero():
            return "0"
        return str(p)

    def parse(self, text: str):
        """Inverse of ``format`` for canonical strings."""
        names = {f"y{i}": self.y[i] for i in range(self.nvars)}
        if self.d > 1:
            names["th"] = self.th
        expr = text.replace("^", "**")
        return self.reduce(eval(expr, {"__builtins__": {}}, names))  # noqa: S307

    # group action

    def _split(self, i: int, p):
        """Group the terms of p by the exponent of y_i: {k: P_k} with y_i-free P_k."""
        groups: dict[int, dict] = {}
        for mon, c in zip(p.monoms(), p.coeffs()):
            k = mon[i]
            if k:
                e = list(mon)
                e[i] = 0
                groups.setdefault(k, {})[tuple(e)] = c
            else:
                groups.setdefault(0, {})[mon] = c
        return {k: self.ctx.from_dict(v) for k, v in groups.items()}

    def _demazure_power(self, i: int, k: int):
        table = self._dem_pow[i]
        hit = table.get(k)
        if hit is None:
            a, b = self.y[i], self._sy[i]
            acc = self.zero
            for j in range(k):
                acc = acc + a ** j * b ** (k - 1 - j)
            hit = self.reduce(acc * flint.fmpq(1, 2))
            table[k] = hit
        return hit

    def _action_power(self, i: int, k: int):
        table = self._act_pow[i]
        hit = table.get(k)
        if hit is None:
            hit = self.reduce(self._sy[i] ** k)
            table[k] = hit
        return hit

    def reflect(self, i: int, p):
        """s_i · p."""
        if p.is_zero():
            return p
        acc = self.zero
        for k, P in self._split(i, p).items():
            acc = acc + (P * self._action_power(i, k) if k else P)
        return self.reduce(acc)

    def demazure(self, i: int, p):
        """∂_s(p) = (p − s·p)/(2x_s), via the power formula."""
        if p.is_zero():
            return p
        acc = self.zero
        for k, P in self._split(i, p).items():
            if k:
                acc = acc + P * self._demazure_power(i, k)
        return self.reduce(acc)

    def invariant_decompose(self, i: int, p):
        """(P_s(p), ∂_s(p)) with p = P_s(p) + x_s·∂_s(p)."""
        dp = self.demazure(i, p)
        if dp.is_zero():
            return p, dp
        return self.reduce(p - self.x[i] * dp), dp

    def demazure_word(self, word, p, check: bool = True):
        """∂_{s_1}⋯∂_{s_n}(p); the rightmost operator acts first."""
        if check and not self.system.is_reduced(tuple(word)):
            raise NotReduced("Demazure word must be reduced")
        for i in reversed(tuple(word)):
            p = self.demazure(i, p)
            if p.is_zero():
                break
        return p

    def _substitution(self, w: GroupElement):
        hit = self._subs_cache.get(w.key)
        if hit is None:
            # w·y_j = Σ_i (M_{w^{-1}})_{ji} y_i
            winv = w.inverse()
            M = self.system.matrix(winv)
            subs = []
            for j in range(self.nvars):
                acc = self.zero
                for i in range(self.nvars):
                    if M[j][i]:
                        acc = acc + self.const(M[j][i]) * self.y[i]
                subs.append(self.reduce(acc))
            if self.d > 1:
                subs.append(self.th)
            with self._lock:
                self._subs_cache[w.key] = subs
            hit = subs
        return hit

    def act(self, w, p):
        """w · p for a group element or a word."""
        if p.is_zero():
            return p
        if not isinstance(w, GroupElement):
            w = self.system.element(tuple(w))
        if w.length == 0:
            return p
        if w.length == 1:
            return self.reflect(w.word[0], p)
        return self.reduce(p.compose(*self._substitution(w), ctx=self.ctx))

    def check_demazure(self, i: int, p, dp):
        """Assert 2x_s·∂_s(p) = p − s·p (the division is exact)."""
        if not (self.reduce(self.x[i] * dp * 2) - (p - self.reflect(i, p))).is_zero():
            raise InternalDivisionFailure("Demazure operator failed the division identity")

    # dihedral data

    def dihedral_data(self, s: int, r: int) -> "DihedralData":
        key = (s, r)
        with self._lock:
            hit = self._dihedral.get(key)
        if hit is None:
            hit = DihedralData.build(self, s, r)
            with self._lock:
                self._dihedral[key] = hit
        return hit


@dataclass
class DihedralData:
    """Anti-invariant d, the basis {∂_w(d)} and its dual for the parabolic ⟨s, r⟩."""

    ring: PolyRing
    s: int
    r: int
    m: int
    elements: list  # words of the parabolic, as alternating tuples
    reflections: list  # (palindromic word, conjugator word, simple letter)
    x_t: list
    d: object
    basis: dict  # word -> ∂_w(d)
    dual: dict  # word -> ∂_w(d)*
    top: FieldElement  # ∂_{w0}(d)

    @classmethod
    def build(cls, ring: PolyRing, s: int, r: int) -> "DihedralData":
        W = ring.system
        m = W.m(s, r)
        words = [()]
        for n in range(1, m + 1):
            words.append(alternating(s, r, n))
            if n < m:
                words.append(alternating(r, s, n))
        refl = []
        seen = set()
        for k in range(1, m + 1, 2):
            for a, b in sorted([(s, r), (r, s)]):
                w = alternating(a, b, k)
                el = W.element(w)
                if el.key in seen:
                    continue
                seen.add(el.key)
                half = (k - 1) // 2
                refl.append((w, w[:half], w[half]))
        assert len(refl) == m
        x_t = [ring.act(W.element(conj), ring.x[u]) for _, conj, u in refl]
        d = ring.one
        for f in x_t:
            d = ring.mul(d, f)
        basis = {w: ring.demazure_word(w, d) for w in words}
        w0 = alternating(s, r, m)
        top = ring.scalar_of(basis[w0])
        if top.is_zero():
            raise SingularPairing("∂_{w0}(d) vanishes")
        data = cls(ring, s, r, m, words, refl, x_t, d, basis, {}, top)
        for w in words:
            data.dual[w] = data._solve_dual(w)
        return data

    @property
    def w0(self):
        return alternating(self.s, self.r, self.m)

    def t_hat(self, p):
        """The symmetrizing form: λ_e in p = Σ λ_w ∂_w(d), λ_w invariant."""
        ring = self.ring
        val = ring.demazure_word(self.w0, p, check=False)
        return ring.reduce(val * ring.const(self.top.inverse()))

    def _solve_dual(self, w):
        from .linalg import LinearSystem

        ring = self.ring
        k = len(w)
        mons = ring.monomials(k)
        sysm = LinearSystem(ring, len(mons))
        for u in self.elements:
            if len(u) > k:
                continue
            for j, mon in enumerate(mons):
                sysm.add(u, j, self.t_hat(ring.mul(self.basis[u], mon)))
            if u == w:
                sysm.add_rhs(u, ring.one)
        try:
            sol = sysm.solve_unique()
        except ValueError as exc:
            raise SingularPairing(f"dual basis element for {w} not determined") from exc
        acc = ring.zero
        for c, mon in zip(sol, mons):
            if c:
                acc = acc + ring.const(c) * mon
        return ring.reduce(acc)
