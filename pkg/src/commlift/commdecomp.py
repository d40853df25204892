"""Explicit commutator witnesses for non-scalar elements of ``SL_n(Z/p^k)``.

The pipeline:

1. Pick balanced units ``a_1..a_n`` (product 1, ``a_i = a_{n+1-i}^-1``,
   distinct residues).
2. Conjugate A and clear rows/columns with unipotents until
   ``X (g A g^-1) Y = D^2`` with ``D = diag(a_i)``.
3. Then ``g A g^-1 = P Q^-1`` with ``P = X^-1 D`` lower triangular and
   ``Q = (D Y^-1)^-1`` upper triangular, both with eigenvalues ``{a_i}``.
   A determinant-1 ``h`` with ``h P h^-1 = Q`` gives ``g A g^-1 = [P, h]``.

Inside this module ``A^g`` means ``g A g^-1``.
"""

from __future__ import annotations

from .errors import (
    DeterminantMismatch,
    EigenvalueMismatch,
    FieldTooSmall,
    HypothesisViolated,
    NotInvertible,
    NotRegularSemisimple,
    ScalarModM,
)
from .henselift import scalar_commutator
from .localring import RingElem, Zmod, primitive_root_of_unity, teichmuller
from .matlinalg import (
    RMatrix,
    det_raw,
    inverse,
    is_in_sl,
    is_invertible,
    is_scalar_mod_m,
    LinearMapOverField,
    nullspace,
    reduce_to_field,
    solve_over_ring,
)
from .witness import CommutatorWitness, DecompositionTrace


def _raw(ring, a):
    if isinstance(a, RingElem):
        return a.value
    return ring.from_int(a) if isinstance(a, int) else a


def _require_nonscalar(A: RMatrix):
    if not is_invertible(A):
        raise NotInvertible("matrix is not invertible")
    if is_scalar_mod_m(A):
        raise ScalarModM("matrix is scalar modulo the maximal ideal")


# ---------------------------------------------------------------------------
# steering a diagonal entry


def conjugate_entry_2x2(A: RMatrix, alpha) -> RMatrix:
    """``X`` in ``SL_2`` with ``(X A X^-1)[0][0] == alpha``.

    For ``X = [[x, y], [z, w]]`` that entry is ``axw - bxz + cyw - dyz``.
    If b is a unit take ``x = w = 1, y = 0``; if c is a unit take
    ``x = w = 1, z = 0``. Otherwise ``a - d`` is a unit; solve
    ``a beta - d gamma = alpha, beta - gamma = 1`` on the residue-level
    equations, start from ``x = y = 1, z = gamma, w = beta`` and refine
    ``(z, w)`` level by level (the Jacobian has unit determinant
    ``a - b + c - d``).
    """
    ring = A.ring
    if A.n != 2:
        raise ValueError("conjugate_entry_2x2 needs a 2x2 matrix")
    _require_nonscalar(A)
    alpha = _raw(ring, alpha)
    (a, b), (c, d) = A.rows
    if a == alpha:
        return RMatrix.identity(ring, 2)
    one, zero = ring.one, ring.zero
    if ring.is_unit(b):
        z = ring.mul(ring.sub(a, alpha), ring.inv(b))
        return RMatrix(ring, ((one, zero), (z, one)))
    if ring.is_unit(c):
        y = ring.mul(ring.sub(alpha, a), ring.inv(c))
        return RMatrix(ring, ((one, y), (zero, one)))
    a_minus_d = ring.sub(a, d)
    gamma = ring.mul(ring.sub(alpha, a), ring.inv(a_minus_d))
    beta = ring.add(gamma, one)
    x, y, z, w = one, one, gamma, beta

    def residual(z, w):
        entry = ring.sub(
            ring.add(ring.mul(a, ring.mul(x, w)), ring.mul(c, ring.mul(y, w))),
            ring.add(ring.mul(b, ring.mul(x, z)), ring.mul(d, ring.mul(y, z))),
        )
        det = ring.sub(ring.mul(x, w), ring.mul(y, z))
        return ring.sub(entry, alpha), ring.sub(det, one)

    # Jacobian of (entry, det) in (z, w)
    j11 = ring.neg(ring.add(ring.mul(b, x), ring.mul(d, y)))
    j12 = ring.add(ring.mul(a, x), ring.mul(c, y))
    j21, j22 = ring.neg(y), x
    jdet_inv = ring.inv(ring.sub(ring.mul(j11, j22), ring.mul(j12, j21)))
    for _ in range(4 * ring.k + 4):
        f1, f2 = residual(z, w)
        if ring.is_zero(f1) and ring.is_zero(f2):
            return RMatrix(ring, ((x, y), (z, w)))
        dz = ring.mul(jdet_inv, ring.sub(ring.mul(j22, f1), ring.mul(j12, f2)))
        dw = ring.mul(jdet_inv, ring.sub(ring.mul(j11, f2), ring.mul(j21, f1)))
        z, w = ring.sub(z, dz), ring.sub(w, dw)
    raise ArithmeticError("Hensel refinement did not converge")  # unreachable: the system is linear in (z, w)


def _schur_block(A: RMatrix):
    """``a C - z w^T`` for ``A = [[a, w^T], [z, C]]``, as raw rows."""
    ring, n = A.ring, A.n
    a = A.rows[0][0]
    return [
        [ring.sub(ring.mul(a, A.rows[i][j]), ring.mul(A.rows[i][0], A.rows[0][j])) for j in range(1, n)]
        for i in range(1, n)
    ]


def _rows_scalar_mod_m(ring, rows) -> bool:
    m = len(rows)
    c = ring.residue(rows[0][0])
    return all(ring.residue(rows[i][j]) == (c if i == j else 0) for i in range(m) for j in range(m))


def conjugate_first_entry(A: RMatrix, a) -> RMatrix:
    """Conjugator ``g`` in ``SL_n`` (n >= 3) with ``A^g = [[a, w^T], [z, C]]`` and
    ``a C - z w^T`` non-scalar mod m."""
    ring, n = A.ring, A.n
    if n < 3:
        raise ValueError("conjugate_first_entry needs n >= 3")
    _require_nonscalar(A)
    a = _raw(ring, a)
    if not ring.is_unit(a):
        raise HypothesisViolated("the prescribed entry must be a unit")
    if A.rows[0][0] == a and not _rows_scalar_mod_m(ring, _schur_block(A)):
        return RMatrix.identity(ring, n)
    one, zero = ring.one, ring.zero

    def ident_rows():
        return [[one if i == j else zero for j in range(n)] for i in range(n)]

    # (i) make the first-column tail nonzero mod m: pick u with A u not a
    # multiple of u mod m, and g with g^-1 e_1 = u
    g = RMatrix.identity(ring, n)
    if all(ring.residue(A.rows[i][0]) == 0 for i in range(1, n)):
        Abar = reduce_to_field(A)
        choice = None
        for j in range(1, n):
            col = [Abar.rows[i][j] for i in range(n)]
            if any(col[i] for i in range(n) if i != j):
                choice = ("swap", j)
                break
        if choice is None:
            # Abar is diagonal; e_1 + e_j fails to be an eigenvector for some j
            j = next(j for j in range(1, n) if Abar.rows[j][j] != Abar.rows[0][0])
            choice = ("shear", j)
        kind, j = choice
        ginv = ident_rows()
        if kind == "swap":
            ginv[0][0], ginv[j][j] = zero, zero
            ginv[j][0], ginv[0][j] = one, ring.neg(one)
        else:
            ginv[j][0] = one
        g = inverse(RMatrix(ring, ginv))
        A = A.conj(g)

    # (ii) shear by [[1, x^T], [0, I]] with x^T v = a - alpha
    v = [A.rows[i][0] for i in range(1, n)]
    jv = next(i for i, x in enumerate(v) if ring.is_unit(x))
    shift = ring.mul(ring.sub(a, A.rows[0][0]), ring.inv(v[jv]))
    T = ident_rows()
    T[0][jv + 1] = shift
    T = RMatrix(ring, T)
    A = A.conj(T)
    g = T @ g

    if _rows_scalar_mod_m(ring, _schur_block(A)):
        # x with x^T v = 0 and x != 0 mod m
        v = [A.rows[i][0] for i in range(1, n)]
        jv = next(i for i, x in enumerate(v) if ring.is_unit(x))
        other = 0 if jv != 0 else 1
        x = [zero] * (n - 1)
        x[other] = v[jv]
        x[jv] = ring.neg(v[other])
        T = ident_rows()
        for i in range(n - 1):
            T[0][i + 1] = x[i]
        T = RMatrix(ring, T)
        A = A.conj(T)
        g = T @ g
    assert A.rows[0][0] == a and not _rows_scalar_mod_m(ring, _schur_block(A))
    return g


# ---------------------------------------------------------------------------
# targets and diagonalisation


def choose_balanced_targets(n: int, ring: Zmod) -> list[RingElem]:
    """Units ``a_1..a_n`` with product 1, ``a_i a_{n+1-i} = 1``, distinct residues.

    Greedy smallest residues for the first half; the second half are exact
    inverses in ``Z/p^k``; the middle entry (odd n) is 1.
    """
    p = ring.p
    if p <= n + 1:
        raise FieldTooSmall(f"residue field F_{p} needs more than {n + 1} elements")
    half = n // 2
    chosen: list[int] = []
    used: set[int] = {1} if n % 2 else set()
    for t in range(2, p):
        if len(chosen) == half:
            break
        t_inv = pow(t, -1, p)
        if t == t_inv or t in used or t_inv in used:
            continue
        chosen.append(t)
        used.update((t, t_inv))
    if len(chosen) < half:
        raise FieldTooSmall(f"not enough residues in F_{p}")  # unreachable for p > n + 1
    first = [ring.from_int(t) for t in chosen]
    middle = [ring.one] if n % 2 else []
    last = [ring.inv(t) for t in reversed(first)]
    return [RingElem(ring, v) for v in first + middle + last]


def diagonalize_via_unipotents(A: RMatrix, targets) -> DecompositionTrace:
    """``(g, X, Y, D)`` with ``X (g A g^-1) Y = D = diag(targets)``."""
    ring, n = A.ring, A.n
    vals = [_raw(ring, t) for t in targets]
    if len(vals) != n:
        raise ValueError("need one target per diagonal entry")
    if not all(ring.is_unit(t) for t in vals):
        raise HypothesisViolated("targets must be units")
    _require_nonscalar(A)
    prod = ring.one
    for t in vals:
        prod = ring.mul(prod, t)
    if prod != det_raw(ring, A.rows):
        raise DeterminantMismatch("product of targets differs from det(A)")
    g, X, Y = _diagonalize(A, vals)
    D = RMatrix.diag(ring, vals)
    trace = DecompositionTrace(g, X, Y, D, tuple(vals))
    assert X @ A.conj(g) @ Y == D
    return trace


def _embed(ring, M: RMatrix) -> RMatrix:
    """``diag(1, M)``."""
    n = M.n + 1
    rows = [[ring.one] + [ring.zero] * (n - 1)]
    for r in M.rows:
        rows.append([ring.zero] + list(r))
    return RMatrix(ring, rows)


def _diagonalize(A: RMatrix, vals: list) -> tuple[RMatrix, RMatrix, RMatrix]:
    ring, n = A.ring, A.n
    a1 = vals[0]
    if n == 2:
        g = conjugate_entry_2x2(A, a1)
    else:
        g = conjugate_first_entry(A, a1)
    B = A.conj(g)
    assert B.rows[0][0] == a1
    inv_a1 = ring.inv(a1)
    one, zero = ring.one, ring.zero
    X = [[one if i == j else zero for j in range(n)] for i in range(n)]
    Y = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for i in range(1, n):
        X[i][0] = ring.neg(ring.mul(B.rows[i][0], inv_a1))
        Y[0][i] = ring.neg(ring.mul(B.rows[0][i], inv_a1))
    X, Y = RMatrix(ring, X), RMatrix(ring, Y)
    if n == 2:
        return g, X, Y
    cleared = X @ B @ Y
    C = RMatrix(ring, tuple(r[1:] for r in cleared.rows[1:]))
    g2, X2, Y2 = _diagonalize(C, vals[1:])
    G2 = _embed(ring, g2)
    G2i = _embed(ring, inverse(g2))
    g_total = G2 @ g
    X_total = _embed(ring, X2) @ G2 @ X @ G2i
    Y_total = G2 @ Y @ G2i @ _embed(ring, Y2)
    return g_total, X_total, Y_total


# ---------------------------------------------------------------------------
# conjugating regular semisimple matrices


def _char_poly_at(P: RMatrix, c):
    ring, n = P.ring, P.n
    rows = [[ring.sub(P.rows[i][j], c) if i == j else P.rows[i][j] for j in range(n)] for i in range(n)]
    f = det_raw(ring, rows)
    # d/dc det(P - cI) = -sum of principal (n-1)-minors
    df = ring.zero
    for i in range(n):
        minor = [r[:i] + r[i + 1:] for k2, r in enumerate(rows) if k2 != i]
        df = ring.sub(df, det_raw(ring, minor))
    return f, df


def eigenpairs(P: RMatrix) -> list[tuple[int, list[int]]]:
    """Exact eigenpairs of a matrix whose residue has n distinct roots in ``F_p``.

    Each residue root is Newton-lifted as a simple root of the characteristic
    polynomial, then its eigenvector is solved over ``Z/p^k`` with one
    coordinate pinned to 1. Ordered by eigenvalue residue.
    """
    ring, n, p = P.ring, P.n, P.ring.p
    Pbar = reduce_to_field(P)
    F = Pbar.ring
    roots = [c for c in range(p) if det_raw(F, [[(Pbar.rows[i][j] - (c if i == j else 0)) % p for j in range(n)] for i in range(n)]) == 0]
    if len(roots) != n:
        raise NotRegularSemisimple("residue does not have n distinct eigenvalues in F_p")
    out = []
    for r in roots:
        lam = ring.from_int(r)
        for _ in range(4 * ring.k + 4):
            f, df = _char_poly_at(P, lam)
            if ring.is_zero(f):
                break
            lam = ring.sub(lam, ring.mul(f, ring.inv(df)))
        else:
            raise NotRegularSemisimple("eigenvalue lift did not converge")
        shifted = [[(P.rows[i][j] - (lam if i == j else 0)) % ring.q for j in range(n)] for i in range(n)]
        resid = LinearMapOverField(p, tuple(tuple(x % p for x in row) for row in shifted))
        vbar = nullspace(resid)[0]
        pin = next(i for i, x in enumerate(vbar) if x)
        cols = [j for j in range(n) if j != pin]
        M = [[row[j] for j in cols] for row in shifted]
        rhs = [-row[pin] % ring.q for row in shifted]
        sol = solve_over_ring(ring, M, rhs)
        if sol is None:
            raise NotRegularSemisimple("eigenvector does not lift")  # unreachable for simple roots
        v = [0] * n
        v[pin] = 1
        for j, x in zip(cols, sol):
            v[j] = x
        out.append((lam, v))
    return out


def cyclic_conjugator(P: RMatrix, Q: RMatrix) -> RMatrix:
    """``h`` with ``h P h^-1 == Q`` and ``det(h) == 1``.

    Both matrices are diagonalised over ``Z/p^k`` (eigenvalues distinct mod m),
    eigenvector columns are matched by eigenvalue, and one column is scaled by
    a unit to force determinant 1.
    """
    ring = P.ring
    if Q.ring != ring or Q.n != P.n:
        raise ValueError("P and Q must share ring and size")
    ep, eq = eigenpairs(P), eigenpairs(Q)
    if [lam for lam, _ in ep] != [lam for lam, _ in eq]:
        raise EigenvalueMismatch("P and Q have different eigenvalues")
    n = P.n
    SP = RMatrix(ring, tuple(tuple(ep[j][1][i] for j in range(n)) for i in range(n)))
    SQ = RMatrix(ring, tuple(tuple(eq[j][1][i] for j in range(n)) for i in range(n)))
    delta = ring.mul(det_raw(ring, SP.rows), ring.inv(det_raw(ring, SQ.rows)))
    scale = RMatrix.diag(ring, [delta] + [ring.one] * (n - 1))
    h = SQ @ scale @ inverse(SP)
    assert h @ P == Q @ h and det_raw(ring, h.rows) == ring.one
    return h


# ---------------------------------------------------------------------------
# witnesses


def commutator_witness(A: RMatrix) -> CommutatorWitness:
    """Exact ``(g1, g2)`` in ``SL_n`` with ``[g1, g2] == A`` for non-scalar-mod-m A.

    The returned witness carries the decomposition trace for targets ``a_i^2``.
    """
    ring = A.ring
    if not isinstance(ring, Zmod):
        raise TypeError("commutator_witness works over Zmod rings")
    if not is_in_sl(A):
        raise HypothesisViolated("target must have determinant 1")
    if is_scalar_mod_m(A):
        raise ScalarModM("target is scalar modulo the maximal ideal")
    a = [t.value for t in choose_balanced_targets(A.n, ring)]
    squares = [ring.mul(t, t) for t in a]
    tr = diagonalize_via_unipotents(A, squares)
    D = RMatrix.diag(ring, a)
    P = inverse(tr.X) @ D
    Q = inverse(D @ inverse(tr.Y))
    h = cyclic_conjugator(P, Q)
    gi = inverse(tr.g)
    g1 = gi @ P @ tr.g
    g2 = gi @ h @ tr.g
    return CommutatorWitness(A, g1, g2, "SL", tr)


def _is_proper_divisor(n: int, m: int) -> bool:
    return m % n == 0 and n < m


def psl_commutator(A: RMatrix) -> CommutatorWitness:
    """Witness for A as an element of ``PSL_n``: ``[g1, g2] = zeta A`` with ``zeta^n = 1``.

    Non-scalar residues go through :func:`commutator_witness`. For
    ``A = c I mod m`` the representative is replaced by ``h = zeta A`` where
    ``zeta`` is the root of unity with residue ``lam / c`` (``lam`` the
    smallest primitive n-th root), so ``h = lam I mod m`` and ``det h = 1``.
    """
    ring, n = A.ring, A.n
    p = ring.p
    if not _is_proper_divisor(n, p - 1):
        raise HypothesisViolated(f"{n} is not a proper divisor of {p} - 1")
    if not is_in_sl(A):
        raise HypothesisViolated("representative must have determinant 1")
    if not is_scalar_mod_m(A):
        w = commutator_witness(A)
        return CommutatorWitness(A, w.g1, w.g2, "PSL", w.trace)
    lam = primitive_root_of_unity(n, p).value
    c = reduce_to_field(A).rows[0][0]
    zeta = teichmuller(lam * pow(c, -1, p) % p, ring)
    assert pow(zeta, n, ring.q) == 1
    h = A.scale(zeta)
    w = scalar_commutator(lam, h)
    return CommutatorWitness(A, w.g1, w.g2, "PSL")
