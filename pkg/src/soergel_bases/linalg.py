"""Exact linear algebra over Q(θ) by embedding into rational matrices.

An unknown λ ∈ Q(θ) is split into its d rational coordinates
λ = Σ_k λ_k θ^k, and every equation is split along the monomial basis of
the polynomial ring and the powers of θ.  The resulting rational system is
solved with FLINT's exact row reduction.  The solution set over Q is closed
under multiplication by θ; bases over Q(θ) are recovered greedily.
"""

from __future__ import annotations

from typing import Hashable, Sequence

import flint

from .field import FieldElement, NumberField


class _Echelon:
    """Incremental row echelon form over Q for membership tests."""

    def __init__(self):
        self.rows: dict[int, dict[int, flint.fmpq]] = {}

    def reduce(self, vec: dict[int, flint.fmpq]) -> dict[int, flint.fmpq]:
        v = dict(vec)
        while v:
            piv = min(v)
            row = self.rows.get(piv)
            if row is None:
                return v
            c = v[piv]
            for k, a in row.items():
                nv = v.get(k, 0) - c * a
                if nv == 0:
                    v.pop(k, None)
                else:
                    v[k] = nv
        return v

    def add(self, vec: dict[int, flint.fmpq]) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        piv = min(v)
        inv = 1 / v[piv]
        self.rows[piv] = {k: a * inv for k, a in v.items()}
        return True

    def __len__(self):
        return len(self.rows)


class LinearSystem:
    """Linear equations Σ_j λ_j·P_j(key) = rhs(key) with λ_j ∈ Q(θ).

    Each ``key`` names one polynomial identity; coefficients are polynomials
    of the ring (reduced modulo the minimal polynomial of θ).
    """

    def __init__(self, ring, nunknowns: int):
        self.ring = ring
        self.field: NumberField = ring.field
        self.d = self.field.degree
        self.n = nunknowns
        self._rows: dict[Hashable, int] = {}
        self._entries: dict[tuple[int, int], flint.fmpq] = {}
        self._rhs: dict[int, flint.fmpq] = {}

    def _row(self, key, mon):
        k = (key, mon)
        r = self._rows.get(k)
        if r is None:
            r = len(self._rows)
            self._rows[k] = r
        return r

    def add(self, key, j: int, poly):
        if poly.is_zero():
            return
        ring = self.ring
        p = poly
        for k in range(self.d):
            if k:
                p = ring.reduce(p * ring.th)
            col = j * self.d + k
            for mon, c in zip(p.monoms(), p.coeffs()):
                r = self._row(key, mon)
                ek = (r, col)
                nv = self._entries.get(ek, 0) + c
                if nv == 0:
                    self._entries.pop(ek, None)
                else:
                    self._entries[ek] = nv

    def add_rhs(self, key, poly):
        for mon, c in zip(poly.monoms(), poly.coeffs()):
            r = self._row(key, mon)
            nv = self._rhs.get(r, 0) + c
            if nv == 0:
                self._rhs.pop(r, None)
            else:
                self._rhs[r] = nv

    def touch(self, key):
        """Register a key with no contribution (identity 0 = rhs)."""
        return key

    def _matrix(self, with_rhs: bool):
        nr = len(self._rows)
        nc = self.n * self.d + (1 if with_rhs else 0)
        M = flint.fmpq_mat(max(nr, 1), max(nc, 1))
        for (r, c), v in self._entries.items():
            M[r, c] = v
        if with_rhs:
            for r, v in self._rhs.items():
                M[r, nc - 1] = v
        return M, nr, nc

    def _rref_free(self, M, ncols):
        R, rank = M.rref()
        pivots = []
        row = 0
        rows, cols = R.nrows(), R.ncols()
        for c in range(cols):
            if row < rank and R[row, c] != 0:
                pivots.append(c)
                row += 1
        return R, rank, pivots

    def solve_unique(self) -> list[FieldElement]:
        """The unique solution; raises ValueError if none or not unique."""
        M, nr, nc = self._matrix(True)
        R, rank, pivots = self._rref_free(M, nc)
        nvar = self.n * self.d
        if nvar in pivots:
            raise ValueError("inconsistent linear system")
        if len(pivots) != nvar:
            raise ValueError("solution is not unique")
        sol = [flint.fmpq(0)] * nvar
        for i, c in enumerate(pivots):
            sol[c] = R[i, nc - 1]
        return self._to_field(sol)

    def solve_any(self):
        """One particular solution (free unknowns set to zero) or None."""
        M, nr, nc = self._matrix(True)
        R, rank, pivots = self._rref_free(M, nc)
        nvar = self.n * self.d
        if nvar in pivots:
            return None
        sol = [flint.fmpq(0)] * nvar
        for i, c in enumerate(pivots):
            sol[c] = R[i, nc - 1]
        return self._to_field(sol)

    def nullity(self) -> int:
        """Dimension over Q(θ) of the homogeneous solution space."""
        nvar = self.n * self.d
        if nvar == 0:
            return 0
        if not self._entries:
            return self.n
        M, nr, nc = self._matrix(False)
        rank = M.rank()
        q = nvar - rank
        assert q % self.d == 0
        return q // self.d

    def nullspace(self) -> list[list[FieldElement]]:
        """A basis over Q(θ) of the homogeneous solution space."""
        nvar = self.n * self.d
        if nvar == 0:
            return []
        if not self._entries:
            basis_q = [{i: flint.fmpq(1)} for i in range(nvar)]
        else:
            M, nr, nc = self._matrix(False)
            R, rank, pivots = self._rref_free(M, nc)
            pivset = set(pivots)
            basis_q = []
            for f in range(nvar):
                if f in pivset:
                    continue
                v = {f: flint.fmpq(1)}
                for i, c in enumerate(pivots):
                    a = R[i, f]
                    if a != 0:
                        v[c] = -a
                basis_q.append(v)
        return [self._to_field_sparse(v) for v in theta_basis(basis_q, self.field, self.n)]

    def _to_field(self, sol) -> list[FieldElement]:
        d = self.d
        return [self.field.from_coeffs(sol[j * d:(j + 1) * d]) for j in range(self.n)]

    def _to_field_sparse(self, v: dict[int, flint.fmpq]) -> list[FieldElement]:
        d = self.d
        dense = [flint.fmpq(0)] * (self.n * d)
        for k, a in v.items():
            dense[k] = a
        return self._to_field(dense)

    @property
    def shape(self):
        return len(self._rows), self.n * self.d


def theta_basis(basis_q: Sequence[dict[int, flint.fmpq]], field: NumberField, n: int):
    """Pick vectors whose Q(θ)-multiples span a θ-stable rational space."""
    d = field.degree
    if d == 1:
        return list(basis_q)
    ech = _Echelon()
    chosen = []
    for v in basis_q:
        if not ech.reduce(v):
            continue
        chosen.append(v)
        w = v
        for _ in range(d):
            ech.add(w)
            w = theta_times(w, field, n)
    return chosen


def theta_times(v: dict[int, flint.fmpq], field: NumberField, n: int) -> dict[int, flint.fmpq]:
    d = field.degree
    out: dict[int, flint.fmpq] = {}
    groups: dict[int, list] = {}
    for k, a in v.items():
        groups.setdefault(k // d, [flint.fmpq(0)] * d)[k % d] = a
    for j, coeffs in groups.items():
        e = field.from_coeffs(coeffs) * field.theta
        for i, a in enumerate(e.coeffs()):
            if a != 0:
                out[j * d + i] = a
    return out


def field_matrix_to_q(rows: Sequence[Sequence[FieldElement]], field: NumberField) -> flint.fmpq_mat:
    """Regular representation: an m×n matrix over Q(θ) as an md×nd rational matrix."""
    d = field.degree
    m = len(rows)
    n = len(rows[0]) if m else 0
    M = flint.fmpq_mat(m * d, n * d)
    theta_pows = [field.one]
    for _ in range(1, d):
        theta_pows.append(theta_pows[-1] * field.theta)
    for i in range(m):
        for j in range(n):
            a = rows[i][j]
            if not a:
                continue
            for k in range(d):
                col = (a * theta_pows[k]).coeffs() if k else a.coeffs()
                for t in range(d):
                    if col[t] != 0:
                        M[i * d + t, j * d + k] = col[t]
    return M


def field_rank(rows: Sequence[Sequence[FieldElement]], field: NumberField) -> int:
    if not rows or not rows[0]:
        return 0
    return field_matrix_to_q(rows, field).rank() // field.degree


def field_inverse(rows: Sequence[Sequence[FieldElement]], field: NumberField):
    d = field.degree
    n = len(rows)
    Q = field_matrix_to_q(rows, field).inv()
    out = []
    for i in range(n):
        out.append([field.from_coeffs([Q[i * d + t, j * d] for t in range(d)]) for j in range(n)])
    return out
