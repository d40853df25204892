"""Enumerated ``SL_n(F_p)`` with a numpy multiplication table.

Elements are indexed in canonical order: row-major entry tuples sorted
lexicographically, i.e. by the base-p integer code of the flattened matrix.
All exhaustive enumeration (word images, class products, obstruction scans)
runs on the index table, so a product of two elements is one array lookup.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded
from .localring import Zmod
from .matlinalg import RMatrix

DEFAULT_TABLE_BUDGET = 30_000_000


def sl_order(n: int, p: int) -> int:
    """``|SL_n(F_p)| = p^(n(n-1)/2) * prod_{i=2..n} (p^i - 1)``."""
    order = p ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        order *= p**i - 1
    return order


def _enumerate_sl(n: int, p: int) -> np.ndarray:
    """All of ``SL_n(F_p)`` as an ``(N, n, n)`` array in canonical order."""
    entries = n * n
    if p**entries > 50_000_000:
        raise BudgetExceeded(f"cannot enumerate {p}^{entries} candidate matrices")
    codes = np.arange(p**entries, dtype=np.int64)
    digits = np.empty((codes.size, entries), dtype=np.int64)
    rest = codes.copy()
    for pos in range(entries - 1, -1, -1):
        digits[:, pos] = rest % p
        rest //= p
    mats = digits.reshape(-1, n, n)
    if n == 2:
        dets = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    elif n == 3:
        m = mats
        dets = (
            m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
        )
    else:
        dets = np.round(np.linalg.det(mats.astype(float))).astype(np.int64)
    return mats[dets % p == 1]


class SLGroup:
    """``SL_n(F_p)`` with index-level multiplication and inversion tables."""

    def __init__(self, n: int, p: int, budget: int = DEFAULT_TABLE_BUDGET):
        order = sl_order(n, p)
        if order * order > budget:
            raise BudgetExceeded(f"|SL({n}, F_{p})|^2 = {order * order} exceeds the table budget {budget}")
        self.n, self.p = n, p
        self.ring = Zmod(p, 1)
        self.elements = _enumerate_sl(n, p)
        self.order = len(self.elements)
        assert self.order == order
        weights = p ** np.arange(n * n - 1, -1, -1, dtype=np.int64)
        self._weights = weights
        self.codes = self.elements.reshape(self.order, -1) @ weights
        self._lookup = np.full(p ** (n * n), -1, dtype=np.int64)
        self._lookup[self.codes] = np.arange(self.order)
        self.mult = self._build_table()
        self.identity = self.index_of_ints(np.eye(n, dtype=np.int64))
        self.inv = np.argmax(self.mult == self.identity, axis=1).astype(np.int64)
        self.center = np.array(
            [i for i in range(self.order) if np.all(self.mult[i] == self.mult[:, i])], dtype=np.int64
        )

    def _build_table(self) -> np.ndarray:
        N, n, p = self.order, self.n, self.p
        flat = self.elements.reshape(N, n * n)
        table = np.empty((N, N), dtype=np.int32 if N < 2**31 else np.int64)
        chunk = max(1, 2_000_000 // (N * n * n))
        for start in range(0, N, chunk):
            a = self.elements[start:start + chunk]
            prod = np.einsum("aij,bjk->abik", a, self.elements) % p
            codes = prod.reshape(len(a), N, n * n) @ self._weights
            table[start:start + chunk] = self._lookup[codes]
        del flat
        return table

    # -- conversion -----------------------------------------------------------
    def index_of_ints(self, m) -> int:
        code = int(np.asarray(m, dtype=np.int64).reshape(-1) % self.p @ self._weights)
        idx = int(self._lookup[code])
        if idx < 0:
            raise ValueError("matrix is not in SL_n(F_p)")
        return idx

    def index_of(self, m: RMatrix) -> int:
        return self.index_of_ints([[m.ring.residue(x) for x in r] for r in m.rows])

    def matrix(self, i: int) -> RMatrix:
        return RMatrix(self.ring, tuple(tuple(int(x) for x in r) for r in self.elements[i]))

    # -- group-level helpers --------------------------------------------------
    def power_map(self, e: int) -> np.ndarray:
        """Index array ``g -> g^e`` (binary exponentiation, negative via inverse)."""
        base = np.arange(self.order) if e >= 0 else self.inv.copy()
        e = abs(e)
        out = np.full(self.order, self.identity, dtype=np.int64)
        while e:
            if e & 1:
                out = self.mult[out, base]
            base = self.mult[base, base]
            e >>= 1
        return out

    def conjugacy_class(self, i: int) -> np.ndarray:
        everyone = np.arange(self.order)
        return np.unique(self.mult[self.mult[everyone, i], self.inv])

    def product_set(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Sorted indices of ``{x y : x in a, y in b}``."""
        mask = np.zeros(self.order, dtype=bool)
        chunk = max(1, 5_000_000 // max(1, len(b)))
        for start in range(0, len(a), chunk):
            mask[self.mult[np.ix_(a[start:start + chunk], b)].ravel()] = True
        return np.flatnonzero(mask)

    def is_conjugation_closed(self, subset: np.ndarray) -> bool:
        mask = np.zeros(self.order, dtype=bool)
        mask[subset] = True
        everyone = np.arange(self.order)
        for start in range(0, len(subset), 256):
            s = subset[start:start + 256]
            conj = self.mult[self.mult[np.ix_(everyone, s)], self.inv[:, None]]
            if not mask[conj].all():
                return False
        return True

    def tuples(self, d: int) -> list[np.ndarray]:
        """Index arrays of every d-tuple, in row-major order (last slot fastest)."""
        grids = np.meshgrid(*([np.arange(self.order)] * d), indexing="ij")
        return [g.ravel() for g in grids]

    def iter_tuples(self, d: int):
        return itertools.product(range(self.order), repeat=d)


@lru_cache(maxsize=8)
def sl_group(n: int, p: int, budget: int = DEFAULT_TABLE_BUDGET) -> SLGroup:
    return SLGroup(n, p, budget)
