"""Deterministic exact linear algebra over the rationals.

Everything downstream (bimodules, tensor towers, Koszul complexes) reduces to
the three primitives here: kernels, subspace intersections and quotients with
explicit projection/section pairs.  All scalars are ``fractions.Fraction``;
no floating point is used anywhere.  Subspaces are stored in reduced row
echelon form, which is unique for a given row space, so equal subspaces have
bit-identical bases regardless of how they were generated.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import gcd

F0 = Fraction(0)
F1 = Fraction(1)

_BIT_CAP_ENV = "NHKOSZUL_MAX_BITS"


class BitSizeExceeded(ArithmeticError):
    """Raised when an intermediate integer exceeds NHKOSZUL_MAX_BITS."""


def _bit_cap():
    raw = os.environ.get(_BIT_CAP_ENV)
    return int(raw) if raw else None


def _check_bits(n, cap):
    if cap is not None and n.bit_length() > cap:
        raise BitSizeExceeded(
            "integer of %d bits exceeds %s=%d" % (n.bit_length(), _BIT_CAP_ENV, cap)
        )


def vec(entries):
    """Coerce an iterable of numbers into a tuple of Fractions."""
    return tuple(Fraction(x) for x in entries)


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    c = Fraction(c)
    return tuple(c * a for a in u)


def zero_vec(n):
    return (F0,) * n


def is_zero_vec(u):
    return all(a == 0 for a in u)


# ---------------------------------------------------------------------------
# Core echelon machinery.
#
# Rows are reduced over the integers (content-normalized after every
# combination) so that Fraction gcd work is paid only once per row at entry
# and exit.  Rows are kept as {column: int} dicts; the inputs in this domain
# (tensor-space relations, action matrices) are usually very sparse and the
# reduction preserves that.
# ---------------------------------------------------------------------------


def _row_to_int(row):
    """Scale a Fraction row to a content-normalized integer dict."""
    d = {}
    denlcm = 1
    for j, x in enumerate(row):
        if x:
            d[j] = x
            denlcm = denlcm * x.denominator // gcd(denlcm, x.denominator)
    if not d:
        return None
    ints = {j: int(x * denlcm) for j, x in d.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    lead = min(ints)
    if ints[lead] < 0:
        g = -g
    return {j: v // g for j, v in ints.items()}


def _normalize_int_row(d, cap):
    if not d:
        return None
    g = 0
    for v in d.values():
        g = gcd(g, v)
    lead = min(d)
    if d[lead] < 0:
        g = -g
    out = {j: v // g for j, v in d.items()}
    if cap is not None:
        for v in out.values():
            _check_bits(v, cap)
    return out


def _combine(row, a, piv, b):
    """Return a*row - b*piv, dropping zeros."""
    out = {}
    for j, v in row.items():
        out[j] = a * v
    for j, v in piv.items():
        w = out.get(j, 0) - b * v
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    return out


class _Echelon:
    """Incremental integer echelon form, finalized to canonical RREF."""

    __slots__ = ("ncols", "rows", "piv_of_col", "cap")

    def __init__(self, ncols):
        self.ncols = ncols
        self.rows = []  # int dicts, ascending pivot column
        self.piv_of_col = {}
        self.cap = _bit_cap()

    def add(self, frac_row):
        row = _row_to_int(frac_row)
        self._add_int(row)

    def _add_int(self, row):
        while row:
            lead = min(row)
            i = self.piv_of_col.get(lead)
            if i is None:
                row = _normalize_int_row(row, self.cap)
                pos = 0
                for pos, r in enumerate(self.rows):
                    if min(r) > lead:
                        break
                else:
                    pos = len(self.rows)
                self.rows.insert(pos, row)
                self._reindex()
                return True
            piv = self.rows[i]
            a, b = piv[lead], row[lead]
            g = gcd(a, b)
            row = _combine(row, a // g, piv, b // g)
            if self.cap is not None:
                for v in row.values():
                    _check_bits(v, self.cap)
        return False

    def _reindex(self):
        self.piv_of_col = {min(r): i for i, r in enumerate(self.rows)}

    @property
    def rank(self):
        return len(self.rows)

    def rref(self):
        """Back-substitute and return (pivot columns, Fraction rows)."""
        rows = [dict(r) for r in self.rows]
        for i in range(len(rows) - 1, -1, -1):
            piv = rows[i]
            lead = min(piv)
            a = piv[lead]
            for m in range(i):
                b = rows[m].get(lead, 0)
                if b:
                    g = gcd(a, b)
                    rows[m] = _combine(rows[m], a // g, piv, b // g)
                    rows[m] = _normalize_int_row(rows[m], self.cap)
        out = []
        pivots = []
        for r in rows:
            lead = min(r)
            a = Fraction(r[lead])
            frow = [F0] * self.ncols
            for j, v in r.items():
                frow[j] = Fraction(v) / a
            pivots.append(lead)
            out.append(tuple(frow))
        return pivots, out


def rref(rows, ncols):
    """Canonical reduced row echelon form of a list of Fraction rows."""
    ech = _Echelon(ncols)
    for r in rows:
        ech.add(r)
    return ech.rref()


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class Matrix:
    """Immutable dense matrix of Fractions with sparse-aware products."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        rows = tuple(vec(r) for r in rows)
        self.rows = rows
        self.nrows = len(rows)
        if rows:
            self.ncols = len(rows[0])
            for r in rows:
                if len(r) != self.ncols:
                    raise ValueError("ragged rows")
        else:
            if ncols is None:
                raise ValueError("empty matrix needs explicit ncols")
            self.ncols = ncols

    @staticmethod
    def zero(nrows, ncols):
        return Matrix((zero_vec(ncols),) * nrows, ncols=ncols)

    @staticmethod
    def identity(n):
        return Matrix(
            tuple(tuple(F1 if i == j else F0 for j in range(n)) for i in range(n)),
            ncols=n,
        )

    @staticmethod
    def from_columns(cols, nrows=None):
        cols = [vec(c) for c in cols]
        if cols:
            nrows = len(cols[0])
        if nrows is None:
            raise ValueError("empty column list needs explicit nrows")
        return Matrix(
            tuple(tuple(c[i] for c in cols) for i in range(nrows)), ncols=len(cols)
        )

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.shape == other.shape
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.shape, self.rows))

    def __repr__(self):
        return "Matrix(%dx%d)" % self.shape

    def is_zero(self):
        return all(x == 0 for r in self.rows for x in r)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(
            tuple(vec_add(a, b) for a, b in zip(self.rows, other.rows)),
            ncols=self.ncols,
        )

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(
            tuple(vec_sub(a, b) for a, b in zip(self.rows, other.rows)),
            ncols=self.ncols,
        )

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return Matrix(tuple(vec_scale(c, r) for r in self.rows), ncols=self.ncols)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch: %s @ %s" % (self.shape, other.shape))
        orows = other.rows
        out = []
        p = other.ncols
        for r in self.rows:
            acc = [F0] * p
            for j, x in enumerate(r):
                if x:
                    for l, y in enumerate(orows[j]):
                        if y:
                            acc[l] += x * y
            out.append(tuple(acc))
        return Matrix(tuple(out), ncols=p)

    def apply(self, v):
        """Matrix-vector product."""
        if len(v) != self.ncols:
            raise ValueError("length mismatch")
        out = []
        for r in self.rows:
            s = F0
            for x, y in zip(r, v):
                if x and y:
                    s += x * y
            out.append(s)
        return tuple(out)

    def transpose(self):
        return Matrix(
            tuple(
                tuple(self.rows[i][j] for i in range(self.nrows))
                for j in range(self.ncols)
            ),
            ncols=self.nrows,
        )

    def kron(self, other):
        """Kronecker product; basis (i,k) ordered with the left index major."""
        out = []
        for a_row in self.rows:
            for b_row in other.rows:
                row = []
                for a in a_row:
                    if a:
                        row.extend(a * b for b in b_row)
                    else:
                        row.extend(F0 for _ in b_row)
                out.append(tuple(row))
        return Matrix(tuple(out), ncols=self.ncols * other.ncols)

    def stack(self, other):
        """Vertical stack."""
        if self.ncols != other.ncols:
            raise ValueError("shape mismatch")
        return Matrix(self.rows + other.rows, ncols=self.ncols)

    def augment(self, other):
        """Horizontal concatenation."""
        if self.nrows != other.nrows:
            raise ValueError("shape mismatch")
        return Matrix(
            tuple(a + b for a, b in zip(self.rows, other.rows)),
            ncols=self.ncols + other.ncols,
        )

    def rank(self):
        ech = _Echelon(self.ncols)
        for r in self.rows:
            ech.add(r)
        return ech.rank

    def kernel(self):
        """Null space {v : Av = 0} as a canonical Subspace."""
        pivots, rows = rref(self.rows, self.ncols)
        pivset = set(pivots)
        free = [j for j in range(self.ncols) if j not in pivset]
        basis = []
        for f in free:
            v = [F0] * self.ncols
            v[f] = F1
            for p, row in zip(pivots, rows):
                if row[f]:
                    v[p] = -row[f]
            basis.append(tuple(v))
        return Subspace(self.ncols, basis)

    def column_space(self):
        return Subspace(self.nrows, self.transpose().rows)

    def solve(self, b):
        """One solution of Ax = b (free variables set to 0), or None."""
        cols = [r for r in self.transpose().rows]
        cols.append(vec(b))
        aug = Matrix.from_columns(cols, nrows=self.nrows)
        pivots, rows = rref(aug.rows, aug.ncols)
        n = self.ncols
        if n in pivots:
            return None
        x = [F0] * n
        for p, row in zip(pivots, rows):
            x[p] = row[n]
        return tuple(x)

    def solve_matrix(self, B):
        """Solve AX = B column-wise; None if any column is unsolvable."""
        if self.nrows != B.nrows:
            raise ValueError("shape mismatch")
        cols = list(self.transpose().rows) + list(B.transpose().rows)
        aug = Matrix.from_columns(cols, nrows=self.nrows)
        pivots, rows = rref(aug.rows, aug.ncols)
        n = self.ncols
        if any(p >= n for p in pivots):
            return None
        xcols = []
        for k in range(B.ncols):
            x = [F0] * n
            for p, row in zip(pivots, rows):
                x[p] = row[n + k]
            xcols.append(tuple(x))
        return Matrix.from_columns(xcols, nrows=n)

    def inverse(self):
        if self.nrows != self.ncols:
            raise ValueError("not square")
        inv = self.solve_matrix(Matrix.identity(self.nrows))
        if inv is None or (self @ inv) != Matrix.identity(self.nrows):
            raise ValueError("matrix is singular")
        return inv


def kernel_basis(m):
    """Null space of a Matrix, in canonical form."""
    return m.kernel()


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


class Subspace:
    """A subspace of Q^n stored by its unique reduced-echelon basis."""

    __slots__ = ("ambient_dim", "basis", "pivots", "_piv_index")

    def __init__(self, ambient_dim, vectors=()):
        self.ambient_dim = ambient_dim
        rows = [vec(v) for v in vectors]
        for r in rows:
            if len(r) != ambient_dim:
                raise ValueError("vector length != ambient dimension")
        pivots, basis = rref(rows, ambient_dim)
        self.pivots = tuple(pivots)
        self.basis = tuple(basis)
        self._piv_index = {p: i for i, p in enumerate(pivots)}

    @staticmethod
    def zero(ambient_dim):
        return Subspace(ambient_dim)

    @staticmethod
    def full(ambient_dim):
        return Subspace(ambient_dim, Matrix.identity(ambient_dim).rows)

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return "Subspace(dim %d in Q^%d)" % (self.dim, self.ambient_dim)

    def matrix(self):
        """Basis vectors as rows."""
        return Matrix(self.basis, ncols=self.ambient_dim)

    def reduce(self, v):
        """Residual of v after subtracting its projection onto the basis."""
        v = vec(v)
        coeffs = [v[p] for p in self.pivots]
        if all(c == 0 for c in coeffs):
            return v, tuple(coeffs)
        out = list(v)
        for c, row in zip(coeffs, self.basis):
            if c:
                for j, x in enumerate(row):
                    if x:
                        out[j] -= c * x
        return tuple(out), tuple(coeffs)

    def contains(self, v):
        residual, _ = self.reduce(v)
        return is_zero_vec(residual)

    def coords(self, v):
        """Coordinates of v over the canonical basis; raises if v not in span."""
        residual, coeffs = self.reduce(v)
        if not is_zero_vec(residual):
            raise ValueError("vector not in subspace")
        return coeffs

    def contains_space(self, other):
        return all(self.contains(b) for b in other.basis)

    def sum(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        return Subspace(self.ambient_dim, self.basis + other.basis)

    def intersect(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        # Kernel of [B_U^T | B_W^T] gives the coefficient pairs (a, b) with
        # sum_i a_i u_i = sum_j b_j w_j; read the common point off the U half.
        cols = list(self.basis) + list(other.basis)
        m = Matrix.from_columns(cols, nrows=self.ambient_dim)
        ker = m.kernel()
        pts = []
        for kv in ker.basis:
            a = kv[: self.dim]
            pt = zero_vec(self.ambient_dim)
            for c, b in zip(a, self.basis):
                if c:
                    pt = vec_add(pt, vec_scale(c, b))
            pts.append(pt)
        return Subspace(self.ambient_dim, pts)


def subspace_intersect(u, w):
    return u.intersect(w)


class Quotient:
    """Quotient data V/W: dimension plus a projection/section pair.

    projection maps ambient coordinates to quotient coordinates and its
    kernel meets V exactly in W; section satisfies projection @ section = id.
    """

    __slots__ = ("dim", "projection", "section")

    def __init__(self, dim, projection, section):
        self.dim = dim
        self.projection = projection
        self.section = section


def _quotient_of_full(ambient, w):
    """Quotient of the full ambient space by the subspace w."""
    pivset = set(w.pivots)
    kept = [j for j in range(ambient) if j not in pivset]
    q = len(kept)
    # proj row for kept column j: e_j - sum_r w_r[j] e_{piv_r}
    proj_rows = []
    for j in kept:
        row = [F0] * ambient
        row[j] = F1
        for p, wrow in zip(w.pivots, w.basis):
            if wrow[j]:
                row[p] = -wrow[j]
        proj_rows.append(tuple(row))
    proj = Matrix(proj_rows, ncols=ambient) if q else Matrix.zero(0, ambient)
    sec_cols = []
    for j in kept:
        col = [F0] * ambient
        col[j] = F1
        sec_cols.append(tuple(col))
    sect = (
        Matrix.from_columns(sec_cols, nrows=ambient)
        if q
        else Matrix.zero(ambient, 0)
    )
    return Quotient(q, proj, sect)


def quotient_space(v, w):
    """Quotient V/W for subspaces W <= V of a common ambient space."""
    if v.ambient_dim != w.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if not v.contains_space(w):
        raise ValueError("W is not contained in V")
    ambient = v.ambient_dim
    if v.dim == ambient:
        return _quotient_of_full(ambient, w)
    # Work in coordinates over the canonical basis of V, then recurse.
    w_in_v = Subspace(v.dim, [v.coords(b) for b in w.basis])
    inner = _quotient_of_full(v.dim, w_in_v)
    # coords extraction: for x in V, coordinate r is x[pivot_r].
    coord_rows = []
    for p in v.pivots:
        row = [F0] * ambient
        row[p] = F1
        coord_rows.append(tuple(row))
    coords_m = Matrix(coord_rows, ncols=ambient)
    emb = v.matrix().transpose()  # V-coords -> ambient
    return Quotient(
        inner.dim, inner.projection @ coords_m, emb @ inner.section
    )


# ---------------------------------------------------------------------------
# Optional prime-field accelerator (property tests only, never for results).
# ---------------------------------------------------------------------------


def rank_mod_p(m, p):
    """Rank of a Matrix reduced mod a prime p; None entry -> ValueError."""
    rows = []
    for r in m.rows:
        out = []
        for x in r:
            if x.denominator % p == 0:
                raise ValueError("denominator not invertible mod %d" % p)
            out.append(x.numerator * pow(x.denominator, -1, p) % p)
        rows.append(out)
    rank = 0
    ncols = m.ncols
    piv_rows = []
    for row in rows:
        row = row[:]
        for prow, pcol in piv_rows:
            if row[pcol]:
                f = row[pcol] * pow(prow[pcol], -1, p) % p
                for j in range(pcol, ncols):
                    row[j] = (row[j] - f * prow[j]) % p
        lead = next((j for j in range(ncols) if row[j]), None)
        if lead is not None:
            piv_rows.append((row, lead))
            piv_rows.sort(key=lambda t: t[1])
            rank += 1
    return rank
