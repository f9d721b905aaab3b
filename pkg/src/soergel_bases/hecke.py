"""Hecke algebra over Z[v, v^-1] in the standard basis, with q = v^-2.

T_s^2 = q + (q - 1) T_s.  Elements are stored in the T-basis; the tilde
basis T~_x = v^l(x) T_x, the Kazhdan-Lusztig basis C'_x and the
Bott-Samelson basis C'_{s_1}...C'_{s_n} are views computed on demand.
"""

from __future__ import annotations

import threading
from typing import Iterable, Mapping

from .coxeter import CoxeterSystem, GroupElement


class LaurentPoly:
    """Integer Laurent polynomial in v, stored as {exponent: coefficient}."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        self.c = {int(k): int(a) for k, a in (coeffs or {}).items() if a}

    @classmethod
    def const(cls, a: int) -> "LaurentPoly":
        return cls({0: a})

    @classmethod
    def monomial(cls, k: int, a: int = 1) -> "LaurentPoly":
        return cls({k: a})

    @classmethod
    def q(cls) -> "LaurentPoly":
        return cls({-2: 1})

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.const(int(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.c)
        for k, a in other.c.items():
            out[k] = out.get(k, 0) + a
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -a for k, a in self.c.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[int, int] = {}
        for k, a in self.c.items():
            for l, b in other.c.items():
                out[k + l] = out.get(k + l, 0) + a * b
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = LaurentPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        return isinstance(other, LaurentPoly) and self.c == other.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __bool__(self):
        return bool(self.c)

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by v^k."""
        return LaurentPoly({e + k: a for e, a in self.c.items()})

    def bar(self) -> "LaurentPoly":
        return LaurentPoly({-e: a for e, a in self.c.items()})

    def coeff(self, k: int) -> int:
        return self.c.get(k, 0)

    def at_one(self) -> int:
        return sum(self.c.values())

    def is_nonnegative(self) -> bool:
        return all(a > 0 for a in self.c.values())

    def min_degree(self):
        return min(self.c) if self.c else None

    def max_degree(self):
        return max(self.c) if self.c else None

    def to_json(self) -> dict:
        return {str(k): a for k, a in sorted(self.c.items())}

    @classmethod
    def from_json(cls, data) -> "LaurentPoly":
        return cls({int(k): int(a) for k, a in data.items()})

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for k in sorted(self.c, reverse=True):
            a = self.c[k]
            if k == 0:
                mon = str(abs(a))
            else:
                mon = ("" if abs(a) == 1 else f"{abs(a)}*") + ("v" if k == 1 else f"v^{k}")
            parts.append(("-" if a < 0 else "+") + mon)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


ZERO = LaurentPoly()
ONE = LaurentPoly.const(1)


class HeckeElement:
    """Finitely supported map from group elements to Laurent polynomials (T-basis)."""

    __slots__ = ("system", "c")

    def __init__(self, system: CoxeterSystem, coeffs: Mapping[GroupElement, LaurentPoly] | None = None):
        self.system = system
        self.c = {x: p for x, p in (coeffs or {}).items() if p}

    @classmethod
    def one(cls, system) -> "HeckeElement":
        return cls(system, {system.identity: ONE})

    @classmethod
    def T(cls, system, x) -> "HeckeElement":
        return cls(system, {system.element(x): ONE})

    @classmethod
    def T_tilde(cls, system, x) -> "HeckeElement":
        x = system.element(x)
        return cls(system, {x: LaurentPoly.monomial(x.length)})

    def _coerce(self, other) -> "HeckeElement":
        if isinstance(other, HeckeElement):
            return other
        return HeckeElement(self.system, {self.system.identity: LaurentPoly.const(int(other))}
                            if not isinstance(other, LaurentPoly) else {self.system.identity: other})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.c)
        for x, p in other.c.items():
            out[x] = out.get(x, ZERO) + p
        return HeckeElement(self.system, out)

    __radd__ = __add__

    def __neg__(self):
        return HeckeElement(self.system, {x: -p for x, p in self.c.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def scale(self, p: LaurentPoly) -> "HeckeElement":
        return HeckeElement(self.system, {x: a * p for x, a in self.c.items()})

    def shift(self, k: int) -> "HeckeElement":
        return HeckeElement(self.system, {x: a.shift(k) for x, a in self.c.items()})

    def times_generator(self, i: int) -> "HeckeElement":
        """Right multiplication by T_s."""
        W = self.system
        q = LaurentPoly.q()
        out: dict[GroupElement, LaurentPoly] = {}

        def add(x, p):
            out[x] = out.get(x, ZERO) + p

        for x, p in self.c.items():
            xs = W.mul_gen(x, i)
            if xs.length > x.length:
                add(xs, p)
            else:
                # T_x T_s = q T_{xs} + (q - 1) T_x
                add(xs, p * q)
                add(x, p * (q - 1))
        return HeckeElement(self.system, out)

    def __mul__(self, other):
        if isinstance(other, (int, LaurentPoly)):
            return self.scale(other if isinstance(other, LaurentPoly) else LaurentPoly.const(other))
        acc = HeckeElement(self.system)
        for y, p in other.c.items():
            term = self
            for i in y.word:
                term = term.times_generator(i)
            acc = acc + term.scale(p)
        return acc

    def __rmul__(self, other):
        if isinstance(other, (int, LaurentPoly)):
            return self.scale(other if isinstance(other, LaurentPoly) else LaurentPoly.const(other))
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, HeckeElement) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def coeff(self, x) -> LaurentPoly:
        return self.c.get(self.system.element(x), ZERO)

    def tilde_coeff(self, x) -> LaurentPoly:
        x = self.system.element(x)
        return self.c.get(x, ZERO).shift(-x.length)

    def support(self) -> list[GroupElement]:
        return sorted(self.c)

    def to_json(self) -> list:
        W = self.system
        return [{"word": W.format_word(x.word), "coeffs": p.to_json()} for x, p in sorted(self.c.items())]

    @classmethod
    def from_json(cls, system, data) -> "HeckeElement":
        return cls(system, {system.element(system.parse_word(d["word"])): LaurentPoly.from_json(d["coeffs"])
                            for d in data})

    def __repr__(self):
        return f"HeckeElement({self})"

    def __str__(self):
        if not self.c:
            return "0"
        return " + ".join(f"({p})T_{x}" for x, p in sorted(self.c.items()))


class HeckeAlgebra:
    """Bar involution and Kazhdan-Lusztig basis for one Coxeter system."""

    def __init__(self, system: CoxeterSystem):
        self.system = system
        self._lock = threading.RLock()
        self._bar_T: dict[GroupElement, HeckeElement] = {}
        self._kl: dict[GroupElement, HeckeElement] = {}

    def one(self):
        return HeckeElement.one(self.system)

    def T(self, x):
        return HeckeElement.T(self.system, x)

    def mul(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        return a * b

    def bar_T(self, x: GroupElement) -> HeckeElement:
        with self._lock:
            hit = self._bar_T.get(x)
        if hit is not None:
            return hit
        if x.length == 0:
            out = self.one()
        else:
            # bar(T_s) = T_s^{-1} = v^2 T_s + (v^2 - 1)
            *head, i = x.word
            prev = self.bar_T(self.system.element(tuple(head)))
            inv_s = HeckeElement(self.system, {self.system.generator(i): LaurentPoly.monomial(2),
                                               self.system.identity: LaurentPoly({2: 1, 0: -1})})
            out = prev * inv_s
        with self._lock:
            self._bar_T[x] = out
        return out

    def bar(self, h: HeckeElement) -> HeckeElement:
        acc = HeckeElement(self.system)
        for x, p in h.c.items():
            acc = acc + self.bar_T(x).scale(p.bar())
        return acc

    def tau(self, h: HeckeElement) -> LaurentPoly:
        return h.c.get(self.system.identity, ZERO)

    def C_s(self, i: int) -> HeckeElement:
        W = self.system
        return HeckeElement(W, {W.identity: LaurentPoly.monomial(1), W.generator(i): LaurentPoly.monomial(1)})

    def kl(self, x) -> HeckeElement:
        """C'_x via C'_y C'_s minus the mu-corrections (x = ys > y)."""
        W = self.system
        x = W.element(x)
        with self._lock:
            hit = self._kl.get(x)
        if hit is not None:
            return hit
        if x.length == 0:
            out = self.one()
        else:
            i = x.word[-1]
            y = W.mul_gen(x, i)
            Cy = self.kl(y)
            out = Cy * self.C_s(i)
            for z in sorted(Cy.c, key=lambda z: (-z.length, z.word)):
                if z == y or W.mul_gen(z, i).length > z.length:
                    continue
                mu = Cy.tilde_coeff(z).coeff(1)
                if mu:
                    out = out - self.kl(z).scale(LaurentPoly.const(mu))
        with self._lock:
            self._kl[x] = out
        return out

    def bs_class(self, word: Iterable[int]) -> HeckeElement:
        """prod (1 + T_{s_i})."""
        out = self.one()
        for i in word:
            out = out + out.times_generator(i)
        return out

    def bs_kl(self, word: Iterable[int]) -> HeckeElement:
        """C'_{s_1} ... C'_{s_n} = v^n prod (1 + T_{s_i})."""
        word = tuple(word)
        return self.bs_class(word).shift(len(word))

    def specialize_q1(self, h: HeckeElement) -> dict[GroupElement, int]:
        return {x: p.at_one() for x, p in h.c.items() if p.at_one()}

    def is_positive(self, h: HeckeElement) -> bool:
        return all(p.is_nonnegative() for p in h.c.values())

    def is_unitriangular(self, h: HeckeElement, w) -> bool:
        w = self.system.element(w)
        if h.c.get(w) != ONE:
            return False
        return all(self.system.bruhat_leq(x, w) for x in h.c)

    def is_bar_invariant(self, h: HeckeElement) -> bool:
        return self.bar(h) == h

    def satisfies_kl_condition(self, h: HeckeElement, x) -> bool:
        x = self.system.element(x)
        if h.tilde_coeff(x) != ONE:
            return False
        for z in h.c:
            if z != x:
                p = h.tilde_coeff(z)
                if p.min_degree() is None or p.min_degree() < 1:
                    return False
        return True

    def in_basis(self, h: HeckeElement, basis) -> dict[GroupElement, LaurentPoly]:
        """Coordinates of h in a basis b_x = T~_x + lower terms; ``basis`` maps x to b_x."""
        rest = h
        out: dict[GroupElement, LaurentPoly] = {}
        while rest.c:
            x = max(rest.c, key=lambda z: (z.length, z.word))
            a = rest.tilde_coeff(x)
            out[x] = a
            rest = rest - basis(x).scale(a)
        return out

    def in_kl_basis(self, h: HeckeElement) -> dict[GroupElement, LaurentPoly]:
        return self.in_basis(h, self.kl)

    def in_bs_basis(self, h: HeckeElement) -> dict[GroupElement, LaurentPoly]:
        return self.in_basis(h, lambda x: self.bs_kl(x.word))
