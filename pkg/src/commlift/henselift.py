"""Derivative of the commutator map, Hensel lifting, and the obstruction scan.

Conventions. ``X^g`` denotes the right action ``g^-1 X g``. With this
convention, for ``eps^2 = 0``::

    [g1 (1 + eps X), g2 (1 + eps Y)] = [g1, g2] (1 + eps L(X, Y))
    L(X, Y) = ((X^g2 - X)^(g1^-1) + (Y^(g1^-1) - Y))^(g2^-1)

``L`` always lands in ``sl_n``. Its image is everything exactly when the
coadjoint actions of ``g1`` and ``g2`` share no nonzero fixed covector, and
that rank condition is what lets a residue-level commutator lift through
every congruence level of ``Z/p^k``.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DerivativeNotSurjective,
    HypothesisViolated,
    InconsistentCongruence,
    NoBasePairFound,
    NotCovered,
    NotInvertible,
    PreconditionUnverified,
)
from .localring import NilExt, Zmod, multiplicative_order, solve_power
from .matlinalg import (
    FieldSolver,
    LinearMapOverField,
    RMatrix,
    commutator,
    det_raw,
    from_gl_coords,
    from_sl_coords,
    gl_basis,
    gl_coords,
    inverse,
    is_in_sl,
    is_invertible,
    is_scalar,
    lift_matrix,
    matrix_to_json,
    nullspace,
    rank,
    reduce_to_field,
    sl_basis,
    sl_coords,
    solve_over_field,
    trace,
)
from .slgroup import sl_group, sl_order
from .witness import CommutatorWitness


def right_conj(X: RMatrix, g: RMatrix, g_inv: RMatrix | None = None) -> RMatrix:
    """``X^g = g^-1 X g``."""
    if g_inv is None:
        g_inv = inverse(g)
    return g_inv @ X @ g


def _field_pair(g1: RMatrix, g2: RMatrix) -> tuple[RMatrix, RMatrix]:
    g1, g2 = reduce_to_field(g1), reduce_to_field(g2)
    if not (is_invertible(g1) and is_invertible(g2)):
        raise NotInvertible("derivative needs invertible matrices")
    return g1, g2


@dataclass(frozen=True)
class CommutatorDerivative:
    g1bar: RMatrix
    g2bar: RMatrix
    domain: str
    map: LinearMapOverField

    @property
    def is_surjective(self) -> bool:
        n = self.g1bar.n
        return rank(self.map) == n * n - 1

    def apply(self, X: RMatrix, Y: RMatrix) -> RMatrix:
        coords = (sl_coords if self.domain == "SL" else gl_coords)
        out = self.map.apply(list(coords(X)) + list(coords(Y)))
        return from_sl_coords(self.g1bar.ring, self.g1bar.n, out)


def commutator_derivative(g1: RMatrix, g2: RMatrix, domain: str = "SL") -> CommutatorDerivative:
    """Matrix of ``(X, Y) -> L(X, Y)`` over ``F_p``.

    Columns are indexed by the basis of ``sl_n + sl_n`` (``domain="SL"``) or
    ``gl_n + gl_n`` (``domain="GL"``); rows by ``sl_n`` coordinates.
    """
    if domain not in ("SL", "GL"):
        raise ValueError("domain must be 'SL' or 'GL'")
    g1, g2 = _field_pair(g1, g2)
    ring, n = g1.ring, g1.n
    g1i, g2i = inverse(g1), inverse(g2)
    basis = sl_basis(ring, n) if domain == "SL" else gl_basis(ring, n)
    cols = []
    for X in basis:
        inner = right_conj(X, g2, g2i) - X
        cols.append(sl_coords(right_conj(right_conj(inner, g1i, g1), g2i, g2)))
    for Y in basis:
        inner = right_conj(Y, g1i, g1) - Y
        cols.append(sl_coords(right_conj(inner, g2i, g2)))
    M = LinearMapOverField.from_columns(ring.p, cols, n * n - 1)
    return CommutatorDerivative(g1, g2, domain, M)


# ---------------------------------------------------------------------------
# fixed covectors and the trace form


def adjoint_map(g: RMatrix) -> LinearMapOverField:
    """``Z -> Z^g`` on ``sl_n(F_p)`` in the fixed coordinates."""
    g = reduce_to_field(g)
    gi = inverse(g)
    cols = [sl_coords(right_conj(b, g, gi)) for b in sl_basis(g.ring, g.n)]
    return LinearMapOverField.from_columns(g.ring.p, cols, g.n * g.n - 1)


def _minus_identity(M: LinearMapOverField, transpose: bool) -> list[list[int]]:
    rows = list(zip(*M.matrix)) if transpose else M.matrix
    p = M.p
    return [[(x - (1 if i == j else 0)) % p for j, x in enumerate(r)] for i, r in enumerate(rows)]


def fixed_covectors(g1: RMatrix, g2: RMatrix) -> list[list[int]]:
    """Basis of covectors on ``sl_n`` fixed by both coadjoint actions.

    A covector ``phi`` is fixed by ``g`` iff ``phi(Z^g) = phi(Z)`` for all Z,
    i.e. ``(Ad_g^T - 1) phi = 0`` in dual coordinates.
    """
    a1, a2 = adjoint_map(g1), adjoint_map(g2)
    stacked = _minus_identity(a1, True) + _minus_identity(a2, True)
    return nullspace(LinearMapOverField(a1.p, stacked))


def has_common_fixed_covector(g1: RMatrix, g2: RMatrix) -> bool:
    return bool(fixed_covectors(g1, g2))


def common_centralizer(g1: RMatrix, g2: RMatrix) -> list[RMatrix]:
    """Basis of ``Z(g1) & Z(g2)`` inside ``sl_n(F_p)``."""
    a1, a2 = adjoint_map(g1), adjoint_map(g2)
    stacked = _minus_identity(a1, False) + _minus_identity(a2, False)
    ring = reduce_to_field(g1).ring
    return [from_sl_coords(ring, g1.n, v) for v in nullspace(LinearMapOverField(a1.p, stacked))]


def trace_form(X: RMatrix, Y: RMatrix) -> int:
    """``<X, Y> = trace(XY)``."""
    return trace(X @ Y)


def twisted_difference_map(g: RMatrix) -> LinearMapOverField:
    """``Z -> Z^g - Z`` on ``sl_n(F_p)``."""
    a = adjoint_map(g)
    return LinearMapOverField(a.p, _minus_identity(a, False))


# ---------------------------------------------------------------------------
# Hensel lifting


def _gl_to_field_matrix(E: RMatrix, p: int, t: int) -> RMatrix:
    """``E / p^t`` reduced mod p; raises if E is not divisible by ``p^t``."""
    pt = p**t
    rows = []
    for r in E.rows:
        if any(x % pt for x in r):
            raise InconsistentCongruence(f"error term is nonzero below level {t}")
        rows.append(tuple(x // pt % p for x in r))
    return RMatrix(Zmod(p, 1), tuple(rows))


def lift_tuple(
    values: Sequence[RMatrix],
    target: RMatrix,
    evaluate: Callable[[Sequence[RMatrix]], RMatrix],
    solver: FieldSolver,
    domain: str,
    codomain: str,
    start_level: int = 1,
) -> tuple[RMatrix, ...]:
    """Level-by-level linear Hensel lifting of ``evaluate(values) = target``.

    ``solver`` factors the right-trivialised derivative at the residue tuple,
    with columns in ``sl_n^d`` (``domain="SL"``) or ``gl_n^d`` coordinates
    and rows in ``sl_n`` or ``gl_n`` coordinates. At level t the error
    ``value^-1 target - 1`` is ``p^t E``; solving ``L(X) = E`` mod p and
    replacing ``g_i`` by ``g_i (1 + p^t X_i)`` clears it. In the SL domain the
    update is followed by a ``diag(u, 1, ..., 1)`` correction with
    ``u = 1 mod p^(t+1)`` so that every ``g_i`` keeps determinant 1.
    """
    ring = target.ring
    if not isinstance(ring, Zmod):
        raise TypeError("lifting works over Zmod rings")
    p, k, n = ring.p, ring.k, target.n
    values = list(values)
    dets = [det_raw(ring, g.rows) for g in values]
    block = n * n - 1 if domain == "SL" else n * n
    ident = RMatrix.identity(ring, n)
    for t in range(start_level, k):
        err = inverse(evaluate(values)) @ target - ident
        E = _gl_to_field_matrix(err, p, t)
        if all(x == 0 for r in E.rows for x in r):
            continue
        if codomain == "SL":
            if trace(E) != 0:
                raise InconsistentCongruence("error term has nonzero trace; determinants disagree")
            rhs = sl_coords(E)
        else:
            rhs = gl_coords(E)
        sol = solver.solve(rhs)
        if sol is None:
            raise DerivativeNotSurjective(f"cannot correct the level-{t} error")
        pt = p**t
        for i, g in enumerate(values):
            c = [pt * x for x in sol[i * block:(i + 1) * block]]
            X = from_sl_coords(ring, n, c) if domain == "SL" else from_gl_coords(ring, n, c)
            g = g @ (ident + X)
            if domain == "SL":
                u = ring.mul(dets[i], ring.inv(det_raw(ring, g.rows)))
                if u != 1:
                    g = RMatrix(ring, (tuple(ring.mul(u, x) for x in g.rows[0]),) + g.rows[1:])
            values[i] = g
    if evaluate(values) != target:
        raise InconsistentCongruence("lifting did not reach the target")
    return tuple(values)


@lru_cache(maxsize=256)
def _commutator_solver(g1bar: RMatrix, g2bar: RMatrix, domain: str) -> FieldSolver:
    return FieldSolver(commutator_derivative(g1bar, g2bar, domain).map)


def hensel_lift_commutator(
    g1: RMatrix, g2: RMatrix, A: RMatrix, start_level: int = 1
) -> tuple[RMatrix, RMatrix]:
    """Lifts ``(g1, g2)`` with ``[g1, g2] = A mod p^start_level`` to an exact solution.

    The result agrees with the input mod ``p^start_level``. If both inputs
    have determinant 1 so do the outputs; otherwise the ``gl_n`` domain is used.
    """
    ring = A.ring
    if not (g1.ring == g2.ring == ring):
        raise ValueError("g1, g2 and A must share a ring")
    if not is_in_sl(A):
        raise HypothesisViolated("target must lie in SL_n")
    domain = "SL" if is_in_sl(g1) and is_in_sl(g2) else "GL"
    solver = _commutator_solver(reduce_to_field(g1), reduce_to_field(g2), domain)
    out = lift_tuple(
        [g1, g2], A, lambda gs: commutator(gs[0], gs[1]), solver, domain, "SL", start_level
    )
    return out[0], out[1]


# ---------------------------------------------------------------------------
# scalar targets


def cycle_matrix(ring, n: int) -> RMatrix:
    """Permutation matrix of the cycle ``(1 2 ... n)``: ``e_j -> e_{j+1}``."""
    rows = [[ring.zero] * n for _ in range(n)]
    for j in range(n):
        rows[(j + 1) % n][j] = ring.one
    return RMatrix(ring, rows)


def primitive_pair(lam: int, n: int, p: int) -> tuple[RMatrix, RMatrix]:
    """``diag(1, lam, ..., lam^(n-1))`` and the n-cycle; their commutator is ``lam I``."""
    F = Zmod(p, 1)
    return RMatrix.diag(F, [pow(lam, i, p) for i in range(n)]), cycle_matrix(F, n)


@dataclass(frozen=True)
class BasePair:
    g1: RMatrix
    g2: RMatrix
    route: str  # "rescaled" or "centralizer-search"
    candidates_tried: int = 0


def scalar_base_pair(lam: int, n: int, p: int, seed: int | None = None, budget: int = 200_000) -> BasePair:
    """An unobstructed pair in ``SL_n(F_p)`` with commutator ``lam I``.

    First route: scale the two primitive-pair matrices into ``SL_n`` by n-th
    roots of their determinants. When a root is missing, keep the diagonal
    matrix ``d`` and replace the cycle by a determinant-1 monomial ``m``
    (one entry negated if needed), then search ``c`` in ``F_p[m]`` (which
    centralises m) for ``det(c) = det(d)^-1`` and no common fixed covector;
    ``[d c, m] = [d, m] = lam I``. The search order is lexicographic in the
    coefficients of ``c``, or shuffled by ``seed``.
    """
    if multiplicative_order(lam, p) != n:
        raise HypothesisViolated(f"{lam} does not have order {n} mod {p}")
    F = Zmod(p, 1)
    d, cyc = primitive_pair(lam, n, p)
    det_d = det_raw(F, d.rows)
    det_c = det_raw(F, cyc.rows)
    nu = solve_power(pow(det_d, -1, p), n, p)
    mu = solve_power(pow(det_c, -1, p), n, p)
    if nu is not None and mu is not None:
        g1, g2 = d.scale(nu.value), cyc.scale(mu.value)
        if not has_common_fixed_covector(g1, g2):
            return BasePair(g1, g2, "rescaled")
    if mu is not None:
        m = cyc.scale(mu.value)
    else:
        fix = RMatrix.diag(F, [pow(det_c, -1, p)] + [1] * (n - 1))
        m = cyc @ fix
    powers = [RMatrix.identity(F, n)]
    for _ in range(n - 1):
        powers.append(powers[-1] @ m)
    want = pow(det_d, -1, p)
    coeff_space = itertools.product(range(p), repeat=n)
    if seed is not None:
        coeff_space = list(coeff_space)
        random.Random(seed).shuffle(coeff_space)
    tried = 0
    for coeffs in coeff_space:
        tried += 1
        if tried > budget:
            break
        c = RMatrix.scalar(F, n, 0)
        for a, pw in zip(coeffs, powers):
            if a:
                c = c + pw.scale(a)
        if det_raw(F, c.rows) != want:
            continue
        g1 = d @ c
        if not has_common_fixed_covector(g1, m):
            return BasePair(g1, m, "centralizer-search", tried)
    raise NoBasePairFound(f"no unobstructed SL pair with commutator {lam}I in SL({n}, F_{p}) after {tried} candidates")


_base_pair_cache: dict = {}


def _cached_base_pair(lam: int, n: int, p: int, seed: int | None) -> BasePair:
    key = (lam, n, p, seed)
    if key not in _base_pair_cache:
        _base_pair_cache[key] = scalar_base_pair(lam, n, p, seed)
    return _base_pair_cache[key]


def _lift_to_sl(g: RMatrix, ring: Zmod) -> RMatrix:
    """Canonical lift of an ``SL_n(F_p)`` matrix, corrected to determinant 1."""
    h = lift_matrix(g, ring)
    u = ring.inv(det_raw(ring, h.rows))
    return RMatrix(ring, (tuple(ring.mul(u, x) for x in h.rows[0]),) + h.rows[1:])


def scalar_commutator(lam: int, A: RMatrix, seed: int | None = None) -> CommutatorWitness:
    """Witness for ``A = lam I mod p`` in ``SL_n(Z/p^k)`` with ``lam`` of order exactly n."""
    ring = A.ring
    if not isinstance(ring, Zmod):
        raise TypeError("scalar_commutator works over Zmod rings")
    p, n = ring.p, A.n
    lam %= p
    if not is_in_sl(A):
        raise HypothesisViolated("target must have determinant 1")
    Abar = reduce_to_field(A)
    if not (is_scalar(Abar) and Abar.rows[0][0] == lam):
        raise HypothesisViolated(f"target is not congruent to {lam}I mod {p}")
    if lam == 0 or multiplicative_order(lam, p) != n:
        raise NotCovered(f"{lam} is not a primitive {n}-th root of unity mod {p}")
    base = _cached_base_pair(lam, n, p, seed)
    g1, g2 = _lift_to_sl(base.g1, ring), _lift_to_sl(base.g2, ring)
    g1, g2 = hensel_lift_commutator(g1, g2, A, start_level=1)
    return CommutatorWitness(A, g1, g2, "SL")


# ---------------------------------------------------------------------------
# obstruction


@dataclass
class ObstructionReport:
    n: int
    p: int
    target: RMatrix
    pairs_enumerated: int
    solutions: int
    obstructed: int
    witness_pair: tuple[RMatrix, RMatrix] | None = None
    solution_pairs: list = field(default_factory=list, repr=False)

    @property
    def all_pairs_obstructed(self) -> bool:
        return self.obstructed == self.solutions

    def to_json(self) -> dict:
        return {
            "group": f"SL({self.n}, F_{self.p})",
            "target": matrix_to_json(self.target),
            "pairs_enumerated": self.pairs_enumerated,
            "solutions": self.solutions,
            "obstructed": self.obstructed,
            "all_pairs_obstructed": self.all_pairs_obstructed,
            "witness_pair": None
            if self.witness_pair is None
            else [matrix_to_json(self.witness_pair[0]), matrix_to_json(self.witness_pair[1])],
        }


def _obstructed_flags(args) -> list[bool]:
    n, p, pairs = args
    G = sl_group(n, p)
    return [has_common_fixed_covector(G.matrix(a), G.matrix(b)) for a, b in pairs]


def obstruction_scan(gbar: RMatrix, budget: int = 1_000_000, jobs: int = 1) -> ObstructionReport:
    """Enumerate every pair in ``SL_n(F_p)`` with commutator ``gbar`` and test each
    for a common fixed covector."""
    gbar = reduce_to_field(gbar)
    n, p = gbar.n, gbar.ring.p
    N = sl_order(n, p)
    if N * N > budget:
        raise BudgetExceeded(f"{N * N} pairs exceed the budget {budget}")
    G = sl_group(n, p)
    t = G.index_of(gbar)
    idx = np.arange(G.order)
    ab = G.mult[idx[:, None], idx[None, :]]
    comm = G.mult[ab, G.inv[ab.T]]
    a_idx, b_idx = np.nonzero(comm == t)
    pairs = list(zip(a_idx.tolist(), b_idx.tolist()))
    if jobs > 1 and len(pairs) > 64:
        size = -(-len(pairs) // jobs)
        chunks = [(n, p, pairs[i:i + size]) for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            flags = [f for part in ex.map(_obstructed_flags, chunks) for f in part]
    else:
        flags = _obstructed_flags((n, p, pairs))
    witness = None
    for (a, b), obstructed in zip(pairs, flags):
        if not obstructed:
            witness = (G.matrix(a), G.matrix(b))
            break
    return ObstructionReport(
        n, p, gbar, N * N, len(pairs), sum(flags), witness, solution_pairs=pairs
    )


@dataclass
class NilpotentReport:
    n: int
    p: int
    gbar: RMatrix
    ring: NilExt
    element: RMatrix
    pairs_checked: int
    max_image_rank: int
    criterion_map_max_rank: int
    missing: list = field(repr=False)
    certified: bool = False

    def to_json(self) -> dict:
        dim = self.n * self.n - 1
        return {
            "group": f"SL({self.n}, O)",
            "ring": self.ring.token,
            "residue": matrix_to_json(self.gbar),
            "ring_order": self.ring.order,
            "sl_dimension": dim,
            "commuting_pairs": self.pairs_checked,
            "max_derivative_rank": self.max_image_rank,
            "max_linear_criterion_rank": self.criterion_map_max_rank,
            "det_element_is_one": det_raw(self.ring, self.element.rows) == self.ring.one,
            "certified_non_commutator": self.certified,
        }


def sl_algebra_elements(n: int, p: int) -> list[RMatrix]:
    """Every element of ``sl_n(F_p)``, ordered by coordinate vector."""
    F = Zmod(p, 1)
    return [from_sl_coords(F, n, c) for c in itertools.product(range(p), repeat=n * n - 1)]


def nilpotent_extension_element(gbar: RMatrix) -> tuple[NilExt, RMatrix, list[RMatrix]]:
    """``O = K + sum_x e_x K`` indexed by ``x in sl_n(K)``, and ``g = gbar (1 + sum_x x e_x)``."""
    gbar = reduce_to_field(gbar)
    n, p = gbar.n, gbar.ring.p
    xs = sl_algebra_elements(n, p)
    labels = tuple("x" + "".join(map(str, sl_coords(x))) for x in xs)
    O = NilExt(p, labels)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            coeffs = {lab: x.rows[i][j] for lab, x in zip(labels, xs) if x.rows[i][j]}
            row.append(O.make(1 if i == j else 0, coeffs))
        rows.append(tuple(row))
    base = RMatrix(O, tuple(tuple(O.from_int(v) for v in r) for r in gbar.rows))
    return O, base @ RMatrix(O, tuple(rows)), xs


def linear_criterion_map(g1: RMatrix, g2: RMatrix) -> LinearMapOverField:
    """``(h1, h2) -> (1 - g2) . h1 + (1 - g1^-1) . h2`` on ``sl_n`` (adjoint action)."""
    g1, g2 = reduce_to_field(g1), reduce_to_field(g2)
    g1i, g2i = inverse(g1), inverse(g2)
    cols = []
    for h in sl_basis(g1.ring, g1.n):
        cols.append(sl_coords(h - g2 @ h @ g2i))
    for h in sl_basis(g1.ring, g1.n):
        cols.append(sl_coords(h - g1i @ h @ g1))
    return LinearMapOverField.from_columns(g1.ring.p, cols, g1.n * g1.n - 1)


def nilpotent_noncommutator_check(
    n: int, p: int, gbar: RMatrix | None = None, budget: int = 1_000_000
) -> NilpotentReport:
    """Certify that ``g = gbar (1 + sum_x x e_x)`` is not a commutator in ``SL_n(O)``.

    ``gbar`` defaults to the identity. For a commutator
    ``[g1 (1 + sum e_x X_x), g2 (1 + sum e_x Y_x)]`` with ``[g1, g2] = gbar``
    the ``e_x`` component is ``L(X_x, Y_x)``, so every ``x`` would have to
    lie in the image of the derivative at ``(g1, g2)``. For each residue
    pair we exhibit an ``x`` outside that image.
    """
    F = Zmod(p, 1)
    gbar = RMatrix.identity(F, n) if gbar is None else reduce_to_field(gbar)
    scan = obstruction_scan(gbar, budget=budget)
    if not scan.all_pairs_obstructed:
        raise PreconditionUnverified(
            f"SL({n}, F_{p}) has unobstructed pairs with commutator {gbar.rows}"
        )
    O, g, xs = nilpotent_extension_element(gbar)
    if det_raw(O, g.rows) != O.one or reduce_to_field(g) != gbar:
        raise PreconditionUnverified("constructed element is not a lift of gbar in SL_n(O)")
    G = sl_group(n, p)
    dim = n * n - 1
    missing, max_rank, max_criterion = [], 0, 0
    for a, b in scan.solution_pairs:
        g1, g2 = G.matrix(a), G.matrix(b)
        L = commutator_derivative(g1, g2, "SL").map
        r = rank(L)
        max_rank = max(max_rank, r)
        max_criterion = max(max_criterion, rank(linear_criterion_map(g1, g2)))
        if r >= dim:
            missing.append(None)
            continue
        x = next(x for x in xs if solve_over_field(L, sl_coords(x)) is None)
        missing.append(x)
    certified = all(x is not None for x in missing)
    return NilpotentReport(n, p, gbar, O, g, len(scan.solution_pairs), max_rank, max_criterion, missing, certified)
