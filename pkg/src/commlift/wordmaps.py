"""Word maps on matrix groups: evaluation, differentials, images and lifts.

A word is a reduced product of generator powers, e.g. ``x1^2*x2^-3*x1``.
Evaluation works over any ring; image enumeration and coverage checks run
on the index tables of :mod:`commlift.slgroup`, so they are exact.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .commdecomp import eigenpairs
from .errors import BudgetExceeded, FormatError, HypothesisViolated, NotFound, NotRegularSemisimple
from .henselift import lift_tuple
from .localring import Zmod
from .matlinalg import (
    FieldSolver,
    LinearMapOverField,
    RMatrix,
    dual_ring,
    gl_basis,
    gl_coords,
    inverse,
    is_diagonal,
    is_in_sl,
    rank,
    reduce_to_field,
    sl_basis,
    sl_coords,
)
from .slgroup import sl_group

DEFAULT_TUPLE_BUDGET = 5_000_000


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """Reduced word: adjacent letters never share a generator, no zero exponents."""

    letters: tuple = ()
    arity: int = 0
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        out: list[list[int]] = []
        for gen, exp in self.letters:
            gen, exp = int(gen), int(exp)
            if gen < 1:
                raise ValueError("generator indices start at 1")
            if exp == 0:
                continue
            if out and out[-1][0] == gen:
                out[-1][1] += exp
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([gen, exp])
        letters = tuple((g, e) for g, e in out)
        needed = max((g for g, _ in self.letters), default=0)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "arity", max(self.arity, needed))

    @classmethod
    def generator(cls, i: int, arity: int = 0) -> "Word":
        return cls(((i, 1),), arity)

    @classmethod
    def commutator_word(cls) -> "Word":
        return cls(((1, 1), (2, 1), (1, -1), (2, -1)), 2, "[x1,x2]")

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters, max(self.arity, other.arity))

    def __pow__(self, e: int) -> "Word":
        base = self if e >= 0 else self.inverse()
        return Word(base.letters * abs(e), self.arity)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)), self.arity)

    def substitute_inverses(self) -> "Word":
        """The word with every generator replaced by its inverse."""
        return Word(tuple((g, -e) for g, e in self.letters), self.arity)

    @property
    def is_trivial(self) -> bool:
        return not self.letters

    def __str__(self):
        if not self.letters:
            return "1"
        return "*".join(f"x{g}" if e == 1 else f"x{g}^{e}" for g, e in self.letters)

    @property
    def name(self) -> str:
        return self.label or str(self)


_TOKEN = re.compile(r"\s*(x(\d+)(?:\^([+-]?\d+))?|\[|\]|,|\*|\^([+-]?\d+))")


def parse_word(text: str, arity: int = 0) -> Word:
    """Parses ``x1^2*x2^-3*x1``, ``[x1,x2]`` (commutator ``a b a^-1 b^-1``),
    ``[x1,x2]^2`` and ``1`` (the trivial word)."""
    src = text.strip()
    if src in ("", "1"):
        return Word((), arity, src or "1")
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise FormatError(f"cannot parse word at {src[pos:]!r}")
        tokens.append(m)
        pos = m.end()
    idx = 0

    def peek():
        return tokens[idx].group(1).strip() if idx < len(tokens) else None

    def factor() -> Word:
        nonlocal idx
        if idx >= len(tokens):
            raise FormatError("unexpected end of word")
        m = tokens[idx]
        tok = m.group(1).strip()
        if m.group(2):
            idx += 1
            w = Word(((int(m.group(2)), int(m.group(3) or 1)),))
        elif tok == "[":
            idx += 1
            a = product()
            if peek() != ",":
                raise FormatError("expected ',' in commutator")
            idx += 1
            b = product()
            if peek() != "]":
                raise FormatError("expected ']'")
            idx += 1
            w = a * b * a.inverse() * b.inverse()
        else:
            raise FormatError(f"unexpected token {tok!r}")
        if idx < len(tokens) and tokens[idx].group(4):
            w = w ** int(tokens[idx].group(4))
            idx += 1
        return w

    def product() -> Word:
        nonlocal idx
        w = factor()
        while peek() == "*":
            idx += 1
            w = w * factor()
        return w

    w = product()
    if idx != len(tokens):
        raise FormatError(f"trailing input in word {text!r}")
    return Word(w.letters, arity, src)


# ---------------------------------------------------------------------------
# evaluation and differentials


def _power(g: RMatrix, e: int, g_inv: RMatrix | None = None) -> RMatrix:
    if e < 0:
        g = g_inv if g_inv is not None else inverse(g)
        e = -e
    out = RMatrix.identity(g.ring, g.n)
    while e:
        if e & 1:
            out = out @ g
        g = g @ g
        e >>= 1
    return out


def evaluate_word(w: Word, values: Sequence[RMatrix]) -> RMatrix:
    """``w(g_1, ..., g_d)`` by binary powers; negative exponents via exact inverse."""
    if len(values) != w.arity:
        raise ValueError(f"word has arity {w.arity}, got {len(values)} matrices")
    if not values:
        raise ValueError("cannot evaluate a word of arity 0 without a matrix size")
    ring, n = values[0].ring, values[0].n
    inverses: dict[int, RMatrix] = {}
    out = RMatrix.identity(ring, n)
    for gen, exp in w.letters:
        g = values[gen - 1]
        if exp < 0 and gen not in inverses:
            inverses[gen] = inverse(g)
        out = out @ _power(g, exp, inverses.get(gen))
    return out


def _to_dual(g: RMatrix, ring, eps_part: RMatrix | None = None) -> RMatrix:
    n = g.n
    return RMatrix(ring, tuple(
        tuple((g.rows[i][j], eps_part.rows[i][j] if eps_part is not None else 0) for j in range(n))
        for i in range(n)
    ))


def _split_dual(m: RMatrix, field: Zmod) -> tuple[RMatrix, RMatrix]:
    n = m.n
    return (
        RMatrix(field, tuple(tuple(m.rows[i][j][0] for j in range(n)) for i in range(n))),
        RMatrix(field, tuple(tuple(m.rows[i][j][1] for j in range(n)) for i in range(n))),
    )


def _derivative_columns(w: Word, values: Sequence[RMatrix], directions: Callable) -> tuple[RMatrix, list[RMatrix]]:
    """``w(g)`` and the matrices ``L`` with ``w(.., g_i(1 + eps X), ..) = w(g)(1 + eps L)``."""
    field_vals = [reduce_to_field(g) for g in values]
    F = field_vals[0].ring
    D = dual_ring(F.p)
    base = [_to_dual(g, D) for g in field_vals]
    value = evaluate_word(w, field_vals)
    value_inv = inverse(value)
    cols = []
    for i, g in enumerate(field_vals):
        for X in directions(F, g.n):
            args = list(base)
            args[i] = _to_dual(g, D, g @ X)
            _, first = _split_dual(evaluate_word(w, args), F)
            cols.append(value_inv @ first)
    return value, cols


def word_derivative(w: Word, values: Sequence[RMatrix]) -> LinearMapOverField:
    """Differential of the word map at the residue tuple, ``gl_n^d -> gl_n``.

    Column ``(i, E_ab)`` is ``L`` with ``w(.., g_i(1 + eps E_ab), ..) = w(g)(1 + eps L)``,
    computed by one evaluation over the dual numbers ``F_p[eps]``.
    """
    _, cols = _derivative_columns(w, values, gl_basis)
    n = values[0].n
    return LinearMapOverField.from_columns(values[0].ring.p, [gl_coords(L) for L in cols], n * n)


def word_derivative_sl(w: Word, values: Sequence[RMatrix]) -> LinearMapOverField:
    """The same differential restricted to ``sl_n^d`` with values in ``sl_n`` coordinates."""
    _, cols = _derivative_columns(w, values, sl_basis)
    n = values[0].n
    return LinearMapOverField.from_columns(values[0].ring.p, [sl_coords(L) for L in cols], n * n - 1)


def is_submersive(w: Word, values: Sequence[RMatrix]) -> bool:
    """Whether the ``sl``-restricted differential is onto ``sl_n``."""
    n = values[0].n
    return rank(word_derivative_sl(w, values)) == n * n - 1


# ---------------------------------------------------------------------------
# exhaustive images


@dataclass
class WordImageReport:
    words: list[str]
    n: int
    p: int
    group_order: int
    image_size: int
    tuples_enumerated: int
    conjugation_closed: bool | None = None
    inverse_closed: bool | None = None
    cover: bool | None = None
    covered_central: list = field(default_factory=list)
    uncovered_central: list = field(default_factory=list)
    uncovered_count: int = 0
    samples: list = field(default_factory=list)
    sampled: bool = False
    k: int = 1

    def to_json(self) -> dict:
        doc = {
            "word": self.words[0] if len(self.words) == 1 else self.words,
            "group": f"SL({self.n}, F_{self.p})",
            "n": self.n,
            "p": self.p,
            "k": self.k,
            "group_order": self.group_order,
            "image_size": self.image_size,
            "tuples_enumerated": self.tuples_enumerated,
            "sampled": self.sampled,
        }
        for key in ("conjugation_closed", "inverse_closed", "cover"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        if self.cover is not None:
            doc["uncovered_count"] = self.uncovered_count
            doc["covered_central"] = self.covered_central
            doc["uncovered_central"] = self.uncovered_central
        if self.samples:
            doc["samples"] = self.samples
        return doc


def _word_values(G, w: Word, slots: list[np.ndarray]) -> np.ndarray:
    """Index of ``w`` evaluated on the tuples given slot by slot."""
    out = np.full(slots[0].shape if slots else 1, G.identity, dtype=np.int64)
    powers: dict[int, np.ndarray] = {}
    for gen, exp in w.letters:
        if exp not in powers:
            powers[exp] = G.power_map(exp)
        out = G.mult[out, powers[exp][slots[gen - 1]]]
    return out


def _image_chunk(args) -> np.ndarray:
    n, p, letters, arity, start, stop = args
    G = sl_group(n, p)
    return _image_mask(G, Word(letters, arity), start, stop)


def _image_mask(G, w: Word, start: int, stop: int) -> np.ndarray:
    """Mask of values over tuples whose first slot lies in ``[start, stop)``."""
    mask = np.zeros(G.order, dtype=bool)
    d = w.arity
    rest = [np.arange(G.order)] * (d - 1)
    tail = [g.ravel() for g in np.meshgrid(*rest, indexing="ij")] if d > 1 else []
    for first in range(start, stop):
        slots = [np.full(tail[0].size if tail else 1, first, dtype=np.int64)] + tail
        mask[_word_values(G, w, slots)] = True
    return mask


def image_indices(w: Word, n: int, p: int, budget: int = DEFAULT_TUPLE_BUDGET, jobs: int = 1) -> np.ndarray:
    """Sorted indices (canonical order) of ``w(SL_n(F_p))``, by full enumeration."""
    G = sl_group(n, p)
    if w.arity == 0:
        return np.array([G.identity], dtype=np.int64)
    total = G.order**w.arity
    if total > budget:
        raise BudgetExceeded(f"{total} tuples exceed the enumeration budget {budget}")
    if jobs > 1 and G.order > 1:
        step = -(-G.order // (4 * jobs))
        chunks = [(n, p, w.letters, w.arity, s, min(s + step, G.order)) for s in range(0, G.order, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            masks = list(pool.map(_image_chunk, chunks))
        mask = np.logical_or.reduce(masks)
    else:
        mask = _image_mask(G, w, 0, G.order)
    return np.flatnonzero(mask)


def word_image(w: Word, n: int, p: int, budget: int = DEFAULT_TUPLE_BUDGET, jobs: int = 1) -> WordImageReport:
    """Exact image of ``w`` on ``SL_n(F_p)`` with closure self-checks."""
    G = sl_group(n, p)
    img = image_indices(w, n, p, budget, jobs)
    inv_img = np.sort(G.inv[img])
    return WordImageReport(
        words=[w.name],
        n=n,
        p=p,
        group_order=G.order,
        image_size=len(img),
        tuples_enumerated=G.order**w.arity,
        conjugation_closed=G.is_conjugation_closed(img),
        inverse_closed=bool(np.array_equal(inv_img, img)),
        samples=[G.matrix(int(i)).to_ints() for i in img[:3]],
    )


def _central_split(G, covered: np.ndarray):
    mask = np.zeros(G.order, dtype=bool)
    mask[covered] = True
    yes = [G.matrix(int(z)).to_ints() for z in G.center if mask[z]]
    no = [G.matrix(int(z)).to_ints() for z in G.center if not mask[z]]
    central = np.zeros(G.order, dtype=bool)
    central[G.center] = True
    missing_noncentral = int(np.count_nonzero(~mask & ~central))
    return yes, no, missing_noncentral


def check_triple_cover(w1: Word, w2: Word, w3: Word, n: int, p: int,
                       budget: int = DEFAULT_TUPLE_BUDGET, jobs: int = 1) -> WordImageReport:
    """Whether ``w1(G) w2(G) w3(G) = G`` for ``G = SL_n(F_p)``."""
    G = sl_group(n, p)
    images = [image_indices(w, n, p, budget, jobs) for w in (w1, w2, w3)]
    prod = G.product_set(G.product_set(images[0], images[1]), images[2])
    yes, no, missing = _central_split(G, prod)
    return WordImageReport(
        words=[w.name for w in (w1, w2, w3)],
        n=n,
        p=p,
        group_order=G.order,
        image_size=len(prod),
        tuples_enumerated=sum(G.order**w.arity for w in (w1, w2, w3)),
        cover=len(prod) == G.order,
        covered_central=yes,
        uncovered_central=no,
        uncovered_count=G.order - len(prod),
    )


def check_double_cover_noncentral(w1: Word, w2: Word, n: int, p: int,
                                  budget: int = DEFAULT_TUPLE_BUDGET, jobs: int = 1) -> WordImageReport:
    """Whether ``w1(G) w2(G)`` contains every non-central element of ``SL_n(F_p)``.

    Central elements are reported separately as covered or uncovered.
    """
    G = sl_group(n, p)
    images = [image_indices(w, n, p, budget, jobs) for w in (w1, w2)]
    prod = G.product_set(images[0], images[1])
    yes, no, missing = _central_split(G, prod)
    return WordImageReport(
        words=[w1.name, w2.name],
        n=n,
        p=p,
        group_order=G.order,
        image_size=len(prod),
        tuples_enumerated=sum(G.order**w.arity for w in (w1, w2)),
        cover=missing == 0,
        covered_central=yes,
        uncovered_central=no,
        uncovered_count=missing,
    )


def _regular_split_diagonal(t: RMatrix) -> bool:
    vals = [t.ring.residue(x) for x in t.diagonal()]
    return is_diagonal(t) and len(set(vals)) == len(vals)


def class_product(n: int, p: int, t1: RMatrix, t2: RMatrix) -> tuple[np.ndarray, object]:
    if p <= 4:
        raise HypothesisViolated(f"the residue field needs more than 4 elements, got {p}")
    for t in (t1, t2):
        if not _regular_split_diagonal(t):
            raise HypothesisViolated("torus elements must be diagonal with distinct entries")
        if not is_in_sl(t):
            raise HypothesisViolated("torus elements must have determinant 1")
    G = sl_group(n, p)
    c1 = G.conjugacy_class(G.index_of(t1))
    c2 = G.conjugacy_class(G.index_of(t2))
    return G.product_set(c1, c2), G


def check_class_product(n: int, p: int, t1: RMatrix, t2: RMatrix) -> bool:
    """Whether ``C(t1) C(t2)`` contains every non-central element of ``SL_n(F_p)``."""
    prod, G = class_product(n, p, t1, t2)
    return _central_split(G, prod)[2] == 0


# ---------------------------------------------------------------------------
# regular split values and lifting


@dataclass(frozen=True)
class RegularSplitValue:
    values: tuple
    value: RMatrix
    eigenvalues: tuple
    conjugator: RMatrix
    tuples_checked: int

    def to_json(self) -> dict:
        return {
            "tuple": [g.to_ints() for g in self.values],
            "value": self.value.to_ints(),
            "eigenvalues": list(self.eigenvalues),
            "conjugator": self.conjugator.to_ints(),
            "tuples_checked": self.tuples_checked,
        }


def diagonalizing_certificate(t: RMatrix) -> tuple[tuple, RMatrix] | None:
    """``(eigenvalues, S)`` with ``S^-1 t S`` diagonal, or None if t is not regular split."""
    try:
        pairs = eigenpairs(t)
    except NotRegularSemisimple:
        return None
    n = t.n
    S = RMatrix(t.ring, tuple(tuple(pairs[j][1][i] for j in range(n)) for i in range(n)))
    return tuple(lam for lam, _ in pairs), S


def not_submersive(w: Word) -> Callable[[Sequence[RMatrix]], bool]:
    """Avoid-predicate selecting tuples where the differential of ``w`` is not onto."""
    return lambda values: not is_submersive(w, values)


def find_regular_split_value(w: Word, n: int, p: int, avoid: Callable | None = None,
                             budget: int = DEFAULT_TUPLE_BUDGET) -> RegularSplitValue:
    """First tuple (canonical row-major order) not avoided whose value is regular split."""
    G = sl_group(n, p)
    if w.arity == 0:
        raise NotFound("the trivial word only takes the value I")
    total = G.order**w.arity
    if total > budget:
        raise BudgetExceeded(f"{total} tuples exceed the search budget {budget}")
    good = np.array([diagonalizing_certificate(G.matrix(i)) is not None for i in range(G.order)])
    checked = 0
    for start in range(G.order):
        rest = [np.arange(G.order)] * (w.arity - 1)
        tail = [g.ravel() for g in np.meshgrid(*rest, indexing="ij")] if w.arity > 1 else []
        slots = [np.full(tail[0].size if tail else 1, start, dtype=np.int64)] + tail
        vals = _word_values(G, w, slots)
        for pos in np.flatnonzero(good[vals]):
            checked += 1
            values = tuple(G.matrix(int(s[pos])) for s in slots)
            if avoid is not None and avoid(values):
                continue
            value = G.matrix(int(vals[pos]))
            eig, S = diagonalizing_certificate(value)
            return RegularSplitValue(values, value, eig, S, checked)
    raise NotFound(f"no admissible tuple gives a regular split value of {w.name}")


def lift_word_value(w: Word, values: Sequence[RMatrix], target: RMatrix) -> tuple[RMatrix, ...]:
    """Tuple congruent to ``values`` mod p with ``w(tuple') = target`` exactly.

    Uses the ``sl``-restricted differential when all inputs have determinant 1,
    the full ``gl`` one otherwise. For ``w = [x1, x2]`` this is the same
    computation as :func:`commlift.henselift.hensel_lift_commutator`.
    """
    ring = target.ring
    if not all(g.ring == ring for g in values):
        raise ValueError("tuple and target must share a ring")
    if reduce_to_field(evaluate_word(w, values)) != reduce_to_field(target):
        raise HypothesisViolated("target is not congruent to the word value mod p")
    field_vals = [reduce_to_field(g) for g in values]
    if all(is_in_sl(g) for g in values) and is_in_sl(target):
        solver = FieldSolver(word_derivative_sl(w, field_vals))
        domain = codomain = "SL"
    else:
        solver = FieldSolver(word_derivative(w, field_vals))
        domain = codomain = "GL"
    return lift_tuple(list(values), target, lambda gs: evaluate_word(w, gs), solver, domain, codomain)
