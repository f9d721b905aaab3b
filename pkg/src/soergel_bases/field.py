"""Exact real number fields Q(θ) used as coefficient fields.

A field is either Q or a simple extension Q[θ]/(p(θ)) together with a
designated real root of p.  Elements are kept as rational polynomials in
θ reduced modulo p.  Real signs are decided rigorously with ball
arithmetic, refining the precision until the ball excludes zero.

The default field for a Coxeter matrix is Q(2cos(π/L)) with L the lcm of
the bonds, in which cos(π/m) = T_{L/m}(θ/2) for every bond m.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from functools import reduce

import flint

from .errors import ConfigError, FieldMissingConstant


def _to_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, flint.fmpz):
        return flint.fmpq(x)
    if isinstance(x, str):
        f = Fraction(x)
        return flint.fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class FieldElement:
    __slots__ = ("field", "c")

    def __init__(self, field: "NumberField", c: flint.fmpq_poly):
        self.field = field
        self.c = c

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        return self.field(other)

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, self.c + other.c)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, self.c - other.c)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FieldElement(self.field, -self.c)

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, self.field._reduce(self.c * other.c))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.c.is_zero():
            raise ZeroDivisionError("inverse of zero in number field")
        if self.field.degree == 1:
            return FieldElement(self.field, flint.fmpq_poly([1 / self.c[0]]))
        g, s, _ = self.c.xgcd(self.field.modulus)
        # g is a nonzero constant since the modulus is irreducible
        return FieldElement(self.field, self.field._reduce(s / g[0]))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self.field(other)
            except TypeError:
                return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(tuple(int(a.p) * 7919 + int(a.q) for a in self.coeffs()))

    def __bool__(self):
        return not self.c.is_zero()

    def is_zero(self) -> bool:
        return self.c.is_zero()

    def coeffs(self) -> list[flint.fmpq]:
        d = self.field.degree
        out = [flint.fmpq(0)] * d
        for i, a in enumerate(self.c.coeffs()):
            out[i] = flint.fmpq(a)
        return out

    def is_rational(self) -> bool:
        return self.c.degree() <= 0

    def rational(self) -> flint.fmpq:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return flint.fmpq(self.c[0]) if not self.c.is_zero() else flint.fmpq(0)

    def sign(self) -> int:
        return self.field.sign(self)

    def __float__(self):
        return float(self.field.to_arb(self).mid())

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        return self.field.format(self)


def _chebyshev(n: int) -> flint.fmpq_poly:
    """T_n as a rational polynomial in x (cos(nφ) = T_n(cos φ))."""
    t0, t1 = flint.fmpq_poly([1]), flint.fmpq_poly([0, 1])
    if n == 0:
        return t0
    x2 = flint.fmpq_poly([0, 2])
    for _ in range(n - 1):
        t0, t1 = t1, x2 * t1 - t0
    return t1


class NumberField:
    """Q or Q[θ]/(p) with a chosen real root of p.

    ``minpoly`` lists integer coefficients from the constant term upward.
    ``cos`` maps a bond m to an expression in θ for cos(π/m).
    ``root`` optionally gives a rational isolating interval (lo, hi).
    """

    def __init__(self, minpoly=None, cos=None, root=None, name="θ"):
        self.name = name
        if minpoly is None or len(minpoly) <= 2:
            self.degree = 1
            self.modulus = flint.fmpq_poly([0, 1])
            self.spec_minpoly = [0, 1] if minpoly is None else [int(a) for a in minpoly]
            self._root_index = None
        else:
            ints = [int(a) for a in minpoly]
            if ints[-1] == 0:
                raise ConfigError("minimal polynomial has zero leading coefficient")
            zp = flint.fmpz_poly(ints)
            _, factors = zp.factor()
            if len(factors) != 1 or factors[0][1] != 1:
                raise ConfigError(f"polynomial {ints} is not irreducible over Q")
            self.spec_minpoly = ints
            self.degree = len(ints) - 1
            lead = flint.fmpq(ints[-1])
            self.modulus = flint.fmpq_poly([flint.fmpq(a) / lead for a in ints])
            self._zpoly = zp
        self.zero = FieldElement(self, flint.fmpq_poly([]))
        self.one = FieldElement(self, flint.fmpq_poly([1]))
        self._balls: dict[int, flint.arb] = {}
        self._ref_ball = None
        self._root_interval = None
        if self.degree > 1:
            self._choose_root(root, cos)
        self._cos: dict[int, FieldElement] = {}
        self.cos_source: dict[int, str] = {}
        if cos:
            for m, expr in cos.items():
                m = int(m)
                val = self.parse(expr) if isinstance(expr, str) else self(expr)
                self._validate_cos(m, val)
                self._cos[m] = val
                self.cos_source[m] = expr if isinstance(expr, str) else str(expr)

    # construction helpers

    @classmethod
    def rationals(cls) -> "NumberField":
        return cls()

    @classmethod
    def for_bonds(cls, bonds) -> "NumberField":
        """Default field Q(2cos(π/L)), L = lcm of the bonds ≥ 3."""
        ms = sorted({int(m) for m in bonds if int(m) >= 3})
        if not ms:
            f = cls()
            f._cos = {2: f.zero}
            f.cos_source = {2: "0"}
            return f
        big = reduce(lambda a, b: a * b // math.gcd(a, b), ms, 1)
        zp = flint.fmpz_poly.cos_minpoly(2 * big)
        coeffs = [int(a) for a in zp.coeffs()]
        if len(coeffs) <= 2:
            f = cls()
            theta = flint.fmpq(-coeffs[0], coeffs[1]) if len(coeffs) == 2 else flint.fmpq(0)
        else:
            lo = Fraction(math.cos(math.pi / big) * 2) - Fraction(1, 10**6)
            hi = lo + Fraction(2, 10**6)
            f = cls(coeffs, root=(lo, hi))
            theta = None
        for m in set(ms) | {2}:
            if m == 2:
                val = f.zero
                src = "0"
            else:
                cheb = _chebyshev(big // m)
                if theta is not None:
                    val = f(cheb(theta / 2))
                else:
                    half = f.theta / 2
                    val = f.zero
                    for a in reversed(cheb.coeffs()):
                        val = val * half + f(flint.fmpq(a))
                src = f.format(val)
            f._validate_cos(m, val)
            f._cos[m] = val
            f.cos_source[m] = src
        return f

    def _choose_root(self, root, cos):
        roots = [r for r, _ in self._zpoly.complex_roots()]
        cands = [idx for idx, r in enumerate(roots) if r.imag.contains(0)]
        if root is not None:
            lo, hi = Fraction(str(root[0])), Fraction(str(root[1]))
            self._root_interval = (lo, hi)
            chosen = []
            for idx in cands:
                x = roots[idx].real
                if float(x.mid()) >= float(lo) - 1e-12 and float(x.mid()) <= float(hi) + 1e-12:
                    chosen.append(idx)
            if len(chosen) != 1:
                raise ConfigError(f"interval {root} does not isolate exactly one real root")
            self._root_index = chosen[0]
            return
        if cos:
            good = []
            for idx in cands:
                self._root_index = idx
                self._balls = {}
                self._ref_ball = None
                ok = True
                for m, expr in cos.items():
                    val = self.parse(expr) if isinstance(expr, str) else self(expr)
                    x = self.to_arb(val) - flint.arb(flint.fmpq(1, int(m))).cos_pi()
                    if not x.contains(0):
                        ok = False
                        break
                if ok:
                    good.append(idx)
            if len(good) != 1:
                raise ConfigError("declared cosines do not single out one real embedding")
            self._root_index = good[0]
            self._balls = {}
            self._ref_ball = None
            return
        # largest real root by default
        self._root_index = max(cands, key=lambda i: float(roots[i].real.mid()))

    def _theta_ball(self, prec: int) -> flint.arb:
        if self._ref_ball is None:
            roots = [r for r, _ in self._zpoly.complex_roots()]
            self._ref_ball = roots[self._root_index].real
        if prec not in self._balls:
            old = flint.ctx.prec
            try:
                flint.ctx.prec = prec
                roots = [r for r, _ in self._zpoly.complex_roots()]
                hits = [r.real for r in roots
                        if r.imag.contains(0) and r.real.overlaps(self._ref_ball)]
                if len(hits) != 1:
                    raise ArithmeticError("could not refine the chosen real root")
                self._balls[prec] = hits[0]
            finally:
                flint.ctx.prec = old
        return self._balls[prec]

    # element construction

    def __call__(self, x) -> FieldElement:
        if isinstance(x, FieldElement):
            if x.field is not self:
                raise TypeError("element of a different field")
            return x
        if isinstance(x, flint.fmpq_poly):
            return FieldElement(self, self._reduce(x))
        return FieldElement(self, flint.fmpq_poly([_to_fmpq(x)]))

    def _reduce(self, c: flint.fmpq_poly) -> flint.fmpq_poly:
        if self.degree == 1:
            return c
        if c.degree() < self.degree:
            return c
        return c % self.modulus

    @property
    def theta(self) -> FieldElement:
        if self.degree == 1:
            raise ValueError("the rational field has no generator")
        return FieldElement(self, flint.fmpq_poly([0, 1]))

    def from_coeffs(self, coeffs) -> FieldElement:
        return FieldElement(self, self._reduce(flint.fmpq_poly([_to_fmpq(a) for a in coeffs])))

    def parse(self, text: str) -> FieldElement:
        """Parse an arithmetic expression in θ with rational constants."""
        src = str(text).replace("θ", "theta").replace("^", "**").strip()
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse field expression {text!r}") from exc
        return self._eval(tree.body, text)

    def _eval(self, node, text):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, float):
                return self(Fraction(str(node.value)))
            return self(node.value)
        if isinstance(node, ast.Name) and node.id in ("theta", "t", "th"):
            if self.degree == 1:
                raise ConfigError("θ used in a rational field")
            return self.theta
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self._eval(node.operand, text)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = self._eval(node.left, text)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ConfigError(f"non-integer exponent in {text!r}")
                return a ** node.right.value
            b = self._eval(node.right, text)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
        raise ConfigError(f"unsupported syntax in field expression {text!r}")

    # real embedding

    def to_arb(self, a: FieldElement, prec: int = 64) -> flint.arb:
        coeffs = a.c.coeffs()
        if not coeffs:
            return flint.arb(0)
        old = flint.ctx.prec
        try:
            flint.ctx.prec = prec
            if self.degree == 1:
                return flint.arb(flint.fmpq(coeffs[0]))
            t = self._theta_ball(prec)
            acc = flint.arb(0)
            for c in reversed(coeffs):
                acc = acc * t + flint.arb(flint.fmpq(c))
            return acc
        finally:
            flint.ctx.prec = old

    def sign(self, a: FieldElement) -> int:
        if a.c.is_zero():
            return 0
        if self.degree == 1:
            q = a.c[0]
            return 1 if q > 0 else -1
        prec = 64
        while True:
            x = self.to_arb(a, prec)
            if x.lower() > 0:
                return 1
            if x.upper() < 0:
                return -1
            prec *= 2
            if prec > 1 << 16:
                raise ArithmeticError("sign refinement did not terminate")

    def _validate_cos(self, m: int, val: FieldElement):
        if m < 2:
            raise ConfigError(f"bond {m} has no cosine constant")
        # exact: 2·val is a root of the minimal polynomial of 2cos(π/m)
        mp = flint.fmpz_poly.cos_minpoly(2 * m)
        acc = self.zero
        two = val * 2
        for c in reversed(mp.coeffs()):
            acc = acc * two + self(int(c))
        if not acc.is_zero():
            raise ConfigError(f"declared cos(π/{m}) is not a root of its minimal polynomial")
        diff = self.to_arb(val, 128) - flint.arb(flint.fmpq(1, m)).cos_pi()
        if not (diff.contains(0) or abs(float(diff.mid())) < 1e-20):
            raise ConfigError(f"declared cos(π/{m}) picks the wrong real conjugate")

    def cos_pi(self, m: int) -> FieldElement:
        if m == 2 and 2 not in self._cos:
            return self.zero
        if m not in self._cos:
            raise FieldMissingConstant(f"field has no declared value for cos(π/{m})")
        return self._cos[m]

    def has_cos(self, m: int) -> bool:
        return m == 2 or m in self._cos

    # display / serialization

    def format(self, a: FieldElement) -> str:
        coeffs = a.coeffs()
        parts = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                mon = self.name if i == 1 else f"{self.name}^{i}"
                if c == 1:
                    parts.append(mon)
                elif c == -1:
                    parts.append("-" + mon)
                else:
                    parts.append(f"{c}*{mon}")
        if not parts:
            return "0"
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s

    def to_json(self) -> dict:
        out = {"minpoly": list(self.spec_minpoly)}
        if self.degree > 1:
            x = self._theta_ball(64)
            out["root"] = [str(x.lower()), str(x.upper())]
        out["cos"] = {str(m): self.format(v) for m, v in sorted(self._cos.items())}
        return out

    def __repr__(self):
        if self.degree == 1:
            return "NumberField(Q)"
        return f"NumberField(minpoly={self.spec_minpoly})"
