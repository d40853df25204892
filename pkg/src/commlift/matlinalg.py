"""Matrices over the local rings, and exact linear solving.

:class:`RMatrix` is an immutable ``n x n`` matrix of raw ring values (see
:mod:`commlift.localring`). ``Z/p^k`` matrices go through int fast paths;
everything else uses the ring protocol, so the same code handles dual
numbers and the square-zero extensions.

Linear maps between ``F_p`` vector spaces are :class:`LinearMapOverField`.
Coordinates on ``gl_n`` are the matrix units ``E_ij`` in row-major order.
Coordinates on ``sl_n`` are the off-diagonal ``E_ij`` (row-major, ``i != j``)
followed by ``H_i = E_ii - E_{i+1,i+1}`` for ``i = 1..n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FormatError, NotInvertible, RingMismatch
from .localring import NilExt, Ring, RingElem, Zmod, ring_from_token


def _check_same(*mats: "RMatrix") -> Ring:
    ring = mats[0].ring
    for m in mats[1:]:
        if m.ring != ring:
            raise RingMismatch(f"{ring.token} vs {m.ring.token}")
        if m.n != mats[0].n:
            raise ValueError("dimension mismatch")
    return ring


@dataclass(frozen=True)
class RMatrix:
    ring: Ring
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        n = len(rows)
        if n < 2:
            raise ValueError("matrices must be at least 2x2 (SL_1 is trivial)")
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "rows", rows)

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_ints(cls, ring: Ring, rows: Iterable[Iterable[int]]) -> "RMatrix":
        return cls(ring, tuple(tuple(ring.from_int(v) for v in r) for r in rows))

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "RMatrix":
        return cls.scalar(ring, n, ring.one)

    @classmethod
    def scalar(cls, ring: Ring, n: int, c) -> "RMatrix":
        if isinstance(c, RingElem):
            c = c.value
        elif isinstance(c, int):
            c = ring.from_int(c)
        z = ring.zero
        return cls(ring, tuple(tuple(c if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, ring: Ring, values: Sequence) -> "RMatrix":
        vals = [v.value if isinstance(v, RingElem) else (ring.from_int(v) if isinstance(v, int) else v) for v in values]
        n = len(vals)
        z = ring.zero
        return cls(ring, tuple(tuple(vals[i] if i == j else z for j in range(n)) for i in range(n)))

    # -- accessors ------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entry(self, i: int, j: int) -> RingElem:
        return RingElem(self.ring, self.rows[i][j])

    def diagonal(self) -> list:
        return [self.rows[i][i] for i in range(self.n)]

    def to_ints(self) -> list[list[int]]:
        if not isinstance(self.ring, Zmod):
            raise TypeError("to_ints is only defined over Zmod")
        return [list(r) for r in self.rows]

    def __repr__(self):
        return f"RMatrix({self.ring.token}, {[list(r) for r in self.rows]})"

    # -- arithmetic -----------------------------------------------------------
    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        return matmul(self, other)

    def __add__(self, other: "RMatrix") -> "RMatrix":
        ring = _check_same(self, other)
        return RMatrix(ring, tuple(tuple(ring.add(a, b) for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        ring = _check_same(self, other)
        return RMatrix(ring, tuple(tuple(ring.sub(a, b) for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "RMatrix":
        ring = self.ring
        return RMatrix(ring, tuple(tuple(ring.neg(a) for a in r) for r in self.rows))

    def scale(self, c) -> "RMatrix":
        ring = self.ring
        if isinstance(c, RingElem):
            c = c.value
        elif isinstance(c, int):
            c = ring.from_int(c)
        return RMatrix(ring, tuple(tuple(ring.mul(c, a) for a in r) for r in self.rows))

    def transpose(self) -> "RMatrix":
        return RMatrix(self.ring, tuple(zip(*self.rows)))

    def inverse(self) -> "RMatrix":
        return inverse(self)

    def det(self) -> RingElem:
        return det(self)

    def conj(self, g: "RMatrix") -> "RMatrix":
        """``g A g^-1``."""
        return g @ self @ inverse(g)


# ---------------------------------------------------------------------------
# core operations


def matmul(a: RMatrix, b: RMatrix) -> RMatrix:
    ring = _check_same(a, b)
    cols = tuple(zip(*b.rows))
    if isinstance(ring, Zmod):
        q = ring.q
        return RMatrix(ring, tuple(
            tuple(sum(x * y for x, y in zip(r, c)) % q for c in cols) for r in a.rows
        ))
    add, mul, zero = ring.add, ring.mul, ring.zero
    out = []
    for r in a.rows:
        row = []
        for c in cols:
            acc = zero
            for x, y in zip(r, c):
                acc = add(acc, mul(x, y))
            row.append(acc)
        out.append(tuple(row))
    return RMatrix(ring, tuple(out))


def _bareiss_det(rows: list[list[int]]) -> int:
    """Fraction-free integer determinant."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _laplace_det(ring: Ring, rows) -> object:
    n = len(rows)
    if n == 0:
        return ring.one
    if n == 1:
        return rows[0][0]
    acc = ring.zero
    for j in range(n):
        a = rows[0][j]
        if ring.is_zero(a):
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = ring.mul(a, _laplace_det(ring, minor))
        acc = ring.add(acc, term) if j % 2 == 0 else ring.sub(acc, term)
    return acc


def det_raw(ring: Ring, rows) -> object:
    """Determinant of a square list-of-rows (any size, including 0 and 1)."""
    if isinstance(ring, Zmod):
        return _bareiss_det(rows) % ring.q
    return _laplace_det(ring, [tuple(r) for r in rows])


def det(a: RMatrix) -> RingElem:
    return RingElem(a.ring, det_raw(a.ring, a.rows))


def inverse_raw(ring: Ring, rows) -> list[list]:
    """Gauss-Jordan inverse over a local ring: every pivot is chosen to be a unit."""
    n = len(rows)
    one, zero = ring.one, ring.zero
    if isinstance(ring, Zmod):
        q, p = ring.q, ring.p
        m = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] % p), None)
            if piv is None:
                raise NotInvertible("determinant is not a unit")
            m[c], m[piv] = m[piv], m[c]
            inv = pow(m[c][c], -1, q)
            rc = [x * inv % q for x in m[c]]
            m[c] = rc
            for r in range(n):
                if r != c and m[r][c]:
                    f = m[r][c]
                    m[r] = [(x - f * y) % q for x, y in zip(m[r], rc)]
        return [row[n:] for row in m]
    m = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if ring.is_unit(m[r][c])), None)
        if piv is None:
            raise NotInvertible("determinant is not a unit")
        m[c], m[piv] = m[piv], m[c]
        inv = ring.inv(m[c][c])
        rc = [ring.mul(x, inv) for x in m[c]]
        m[c] = rc
        for r in range(n):
            if r != c and not ring.is_zero(m[r][c]):
                f = m[r][c]
                m[r] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(m[r], rc)]
    return [row[n:] for row in m]


def inverse(a: RMatrix) -> RMatrix:
    return RMatrix(a.ring, tuple(tuple(r) for r in inverse_raw(a.ring, a.rows)))


def commutator(g1: RMatrix, g2: RMatrix) -> RMatrix:
    """``g1 g2 g1^-1 g2^-1``."""
    _check_same(g1, g2)
    return g1 @ g2 @ inverse(g1) @ inverse(g2)


def is_invertible(a: RMatrix) -> bool:
    return a.ring.is_unit(det_raw(a.ring, a.rows))


def is_in_sl(a: RMatrix) -> bool:
    return det_raw(a.ring, a.rows) == a.ring.one


def is_scalar(a: RMatrix) -> bool:
    c = a.rows[0][0]
    z = a.ring.zero
    return all(a.rows[i][j] == (c if i == j else z) for i in range(a.n) for j in range(a.n))


def reduce_to_field(a: RMatrix) -> RMatrix:
    ring = a.ring
    field = ring.residue_field()
    return RMatrix(field, tuple(tuple(ring.residue(x) for x in r) for r in a.rows))


def reduce_precision(a: RMatrix, k: int) -> RMatrix:
    """Image of a ``Z/p^K`` matrix in ``Z/p^k`` (``k <= K``)."""
    if not isinstance(a.ring, Zmod) or k > a.ring.k or k < 1:
        raise ValueError("can only reduce Zmod matrices to a lower precision")
    target = a.ring.with_precision(k)
    return RMatrix(target, tuple(tuple(x % target.q for x in r) for r in a.rows))


def lift_matrix(a: RMatrix, ring: Zmod) -> RMatrix:
    """Canonical (least nonnegative) lift of a lower-precision matrix."""
    if not isinstance(a.ring, Zmod) or a.ring.p != ring.p or a.ring.k > ring.k:
        raise ValueError("can only lift to a higher precision over the same prime")
    return RMatrix(ring, a.rows)


def is_scalar_mod_m(a: RMatrix) -> bool:
    return is_scalar(reduce_to_field(a))


def is_unit_lower(a: RMatrix) -> bool:
    one, z = a.ring.one, a.ring.zero
    return all(a.rows[i][j] == (one if i == j else z) for i in range(a.n) for j in range(i, a.n))


def is_unit_upper(a: RMatrix) -> bool:
    return is_unit_lower(a.transpose())


def is_diagonal(a: RMatrix) -> bool:
    z = a.ring.zero
    return all(a.rows[i][j] == z for i in range(a.n) for j in range(a.n) if i != j)


def sort_key(a: RMatrix) -> tuple:
    """Canonical element order: row-major entries, lexicographic."""
    return tuple(x for r in a.rows for x in r)


# ---------------------------------------------------------------------------
# JSON interchange


def matrix_to_json(a: RMatrix) -> dict:
    return {"ring": a.ring.token, "n": a.n, "rows": [[a.ring.to_json(x) for x in r] for r in a.rows]}


def matrix_from_json(obj: dict, ring: Ring | None = None) -> RMatrix:
    """Parse the interchange format. Entries must be canonical representatives."""
    try:
        token, n, rows = obj["ring"], obj["n"], obj["rows"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"matrix object is missing a field: {exc}") from None
    parsed = ring_from_token(token)
    if ring is not None and parsed != ring:
        raise RingMismatch(f"{parsed.token} vs {ring.token}")
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise FormatError("rows do not match the declared dimension")
    vals = []
    for r in rows:
        row = []
        for x in r:
            v = parsed.from_json(x)
            if parsed.to_json(v) != x:
                raise FormatError(f"entry {x!r} is not a canonical representative")
            row.append(v)
        vals.append(tuple(row))
    try:
        return RMatrix(parsed, tuple(vals))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# Lie algebra coordinates


def gl_basis(ring: Ring, n: int) -> list[RMatrix]:
    out = []
    for i in range(n):
        for j in range(n):
            rows = [[ring.zero] * n for _ in range(n)]
            rows[i][j] = ring.one
            out.append(RMatrix(ring, rows))
    return out


def sl_basis(ring: Ring, n: int) -> list[RMatrix]:
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                rows = [[ring.zero] * n for _ in range(n)]
                rows[i][j] = ring.one
                out.append(RMatrix(ring, rows))
    for i in range(n - 1):
        rows = [[ring.zero] * n for _ in range(n)]
        rows[i][i] = ring.one
        rows[i + 1][i + 1] = ring.neg(ring.one)
        out.append(RMatrix(ring, rows))
    return out


def gl_coords(a: RMatrix) -> list:
    return [x for r in a.rows for x in r]


def sl_coords(a: RMatrix) -> list:
    """Coordinates of a trace-zero matrix in the fixed ``sl_n`` basis.

    The ``H_i`` coefficient is the partial diagonal sum ``a_11 + ... + a_ii``.
    The trace itself is not checked.
    """
    ring, n = a.ring, a.n
    out = [a.rows[i][j] for i in range(n) for j in range(n) if i != j]
    acc = ring.zero
    for i in range(n - 1):
        acc = ring.add(acc, a.rows[i][i])
        out.append(acc)
    return out


def from_gl_coords(ring: Ring, n: int, c: Sequence) -> RMatrix:
    return RMatrix(ring, tuple(tuple(c[i * n + j] for j in range(n)) for i in range(n)))


def from_sl_coords(ring: Ring, n: int, c: Sequence) -> RMatrix:
    rows = [[ring.zero] * n for _ in range(n)]
    it = iter(c)
    for i in range(n):
        for j in range(n):
            if i != j:
                rows[i][j] = next(it)
    h = list(it)
    for i in range(n - 1):
        rows[i][i] = ring.add(rows[i][i], h[i])
        rows[i + 1][i + 1] = ring.sub(rows[i + 1][i + 1], h[i])
    return RMatrix(ring, rows)


def trace(a: RMatrix):
    ring = a.ring
    acc = ring.zero
    for i in range(a.n):
        acc = ring.add(acc, a.rows[i][i])
    return acc


# ---------------------------------------------------------------------------
# linear algebra over F_p


@dataclass(frozen=True)
class LinearMapOverField:
    """Matrix of a linear map ``F_p^cols -> F_p^rows`` in fixed coordinates."""

    p: int
    matrix: tuple

    def __post_init__(self):
        m = tuple(tuple(int(x) % self.p for x in r) for r in self.matrix)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_columns(cls, p: int, columns: Sequence[Sequence[int]], rows: int) -> "LinearMapOverField":
        if not columns:
            return cls(p, tuple(() for _ in range(rows)))
        return cls(p, tuple(zip(*columns)))

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def apply(self, v: Sequence[int]) -> list[int]:
        p = self.p
        return [sum(a * b for a, b in zip(r, v)) % p for r in self.matrix]

    def rank(self) -> int:
        return rank(self)

    def nullspace(self) -> list[list[int]]:
        return nullspace(self)


def rref(matrix: Sequence[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over ``F_p``; returns (rows, pivot columns)."""
    m = [[x % p for x in r] for r in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(M: LinearMapOverField) -> int:
    return len(rref(M.matrix, M.p)[1])


def nullspace(M: LinearMapOverField) -> list[list[int]]:
    """A basis of ``{x : M x = 0}`` over ``F_p``."""
    red, pivots = rref(M.matrix, M.p)
    p, cols = M.p, M.cols
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][f] % p
        basis.append(v)
    return basis


def solve_over_field(M: LinearMapOverField, b: Sequence[int]) -> list[int] | None:
    """One solution of ``M x = b`` over ``F_p`` (free variables 0), or ``None``."""
    if len(b) != M.rows:
        raise ValueError("right-hand side has the wrong length")
    aug = [list(r) + [bi] for r, bi in zip(M.matrix, b)]
    red, pivots = rref(aug, M.p)
    if M.cols in pivots:
        return None
    x = [0] * M.cols
    for i, pc in enumerate(pivots):
        x[pc] = red[i][-1]
    return x


class FieldSolver:
    """Factor ``M`` once, then solve ``M x = b`` for many right-hand sides.

    Produces exactly the solution :func:`solve_over_field` would.
    """

    def __init__(self, M: LinearMapOverField):
        self.M = M
        p, rows = M.p, M.rows
        aug = [list(r) + [1 if i == j else 0 for j in range(rows)] for i, r in enumerate(M.matrix)]
        red, pivots = rref(aug, p)
        self.pivots = [c for c in pivots if c < M.cols]
        self.rank = len(self.pivots)
        # rows of the transform T with T M = rref(M)
        self._transform = [r[M.cols:] for r in red]

    def solve(self, b: Sequence[int]) -> list[int] | None:
        p = self.M.p
        c = [sum(t * x for t, x in zip(row, b)) % p for row in self._transform]
        if any(c[self.rank:]):
            return None
        x = [0] * self.M.cols
        for i, pc in enumerate(self.pivots):
            x[pc] = c[i]
        return x


# ---------------------------------------------------------------------------
# linear algebra over Z/p^k


def solve_over_ring(ring: Zmod, M: Sequence[Sequence[int]], b: Sequence[int]) -> list[int] | None:
    """One solution of ``M x = b`` over ``Z/p^k``, or ``None`` if none exists.

    Valuation-pivoting elimination: each step pivots on an entry of minimal
    valuation in the remaining block and scales it to a pure power of p. Row
    operations are invertible, so the solution set is preserved, and every
    entry to the right of a pivot is divisible by that pivot's power of p, so
    back substitution decides solvability row by row. Free variables are 0.
    """
    if not isinstance(ring, Zmod):
        raise TypeError("solve_over_ring needs a Zmod ring")
    q, p, k = ring.q, ring.p, ring.k
    m = [[x % q for x in r] + [bi % q] for r, bi in zip(M, b)]
    rows = len(m)
    cols = len(M[0]) if rows else 0
    if len(b) != rows:
        raise ValueError("right-hand side has the wrong length")
    perm = list(range(cols))
    pivot_vals: list[int] = []
    r = 0
    while r < min(rows, cols):
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                v = ring.valuation(m[i][j])
                if v < k and (best is None or v < best[0]):
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        m[r], m[i] = m[i], m[r]
        if j != r:
            for row in m:
                row[r], row[j] = row[j], row[r]
            perm[r], perm[j] = perm[j], perm[r]
        unit = m[r][r] // p**v
        uinv = pow(unit, -1, q)
        m[r] = [x * uinv % q for x in m[r]]
        pv = p**v
        for i2 in range(r + 1, rows):
            e = m[i2][r]
            if e:
                f = e // pv
                m[i2] = [(x - f * y) % q for x, y in zip(m[i2], m[r])]
        pivot_vals.append(v)
        r += 1
    rank_ = r
    for i in range(rank_, rows):
        if m[i][cols] % q:
            return None
    y = [0] * cols
    for i in range(rank_ - 1, -1, -1):
        rhs = (m[i][cols] - sum(m[i][j] * y[j] for j in range(i + 1, cols))) % q
        pv = p ** pivot_vals[i]
        if rhs % pv:
            return None
        y[i] = rhs // pv
    x = [0] * cols
    for pos, var in enumerate(perm):
        x[var] = y[pos] % q
    return x


def dual_ring(p: int) -> NilExt:
    """``F_p[eps]/(eps^2)``."""
    return NilExt(p, ("eps",))
