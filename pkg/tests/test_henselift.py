import itertools

import pytest

from commlift.errors import HypothesisViolated, NotCovered, PreconditionUnverified
from commlift.henselift import (
    adjoint_map,
    common_centralizer,
    commutator_derivative,
    fixed_covectors,
    has_common_fixed_covector,
    hensel_lift_commutator,
    nilpotent_noncommutator_check,
    obstruction_scan,
    scalar_base_pair,
    scalar_commutator,
    trace_form,
    twisted_difference_map,
)
from commlift.localring import Zmod
from commlift.matlinalg import (
    RMatrix,
    commutator,
    det,
    from_sl_coords,
    is_in_sl,
    rank,
    reduce_to_field,
)
from commlift.slgroup import sl_group
from conftest import random_sl

F5 = Zmod(5)
R25 = Zmod(5, 2)


def base_pair_f5():
    return RMatrix.from_ints(F5, [[1, 0], [0, 4]]), RMatrix.from_ints(F5, [[0, 2], [2, 0]])


def test_derivative_at_identity_is_zero():
    I = RMatrix.identity(F5, 3)
    L = commutator_derivative(I, I).map
    assert rank(L) == 0


def test_base_pair_derivative_is_surjective():
    g1, g2 = base_pair_f5()
    D = commutator_derivative(g1, g2, "GL")
    assert D.is_surjective
    assert not has_common_fixed_covector(g1, g2)
    assert commutator_derivative(RMatrix.diag(F5, [2, 3]), g2).is_surjective


def test_common_fixed_covector_examples():
    I = RMatrix.identity(F5, 2)
    assert has_common_fixed_covector(I, I)
    G = sl_group(2, 2)
    for a, b in itertools.product(range(G.order), repeat=2):
        if G.mult[a, b] == G.mult[b, a]:
            assert has_common_fixed_covector(G.matrix(a), G.matrix(b))


def test_fixed_covectors_are_fixed():
    g1, g2 = RMatrix.from_ints(F5, [[1, 1], [0, 1]]), RMatrix.from_ints(F5, [[1, 2], [0, 1]])
    covs = fixed_covectors(g1, g2)
    assert covs
    for g in (g1, g2):
        A = adjoint_map(g)
        for phi in covs:
            # phi(Ad_g Z) = phi(Z) for every basis vector Z
            for j in range(A.cols):
                col = [A.matrix[i][j] for i in range(A.rows)]
                assert sum(a * b for a, b in zip(phi, col)) % 5 == phi[j]


def test_trace_form_pairs_centralizer_with_image():
    g = RMatrix.from_ints(F5, [[2, 1], [0, 3]])
    C = common_centralizer(g, g)
    T = twisted_difference_map(g)
    for j in range(T.cols):
        Z = from_sl_coords(F5, 2, [T.matrix[i][j] for i in range(T.rows)])
        for c in C:
            assert trace_form(Z, c) == 0


def test_hensel_lift_examples():
    g1, g2 = (RMatrix.from_ints(R25, m.to_ints()) for m in base_pair_f5())
    target = RMatrix.scalar(R25, 2, 24)
    # the literal lift of diag(1, 4) is not diag(1, -1) mod 25, so the pair moves
    h1, h2 = hensel_lift_commutator(g1, g2, target)
    assert commutator(h1, h2) == target and (h1, h2) != (g1, g2)
    exact = RMatrix.diag(R25, [1, 24])
    assert hensel_lift_commutator(exact, g2, target) == (exact, g2)
    A = RMatrix.from_ints(R25, [[24, 5], [0, 24]])
    h1, h2 = hensel_lift_commutator(g1, g2, A)
    assert commutator(h1, h2) == A
    assert reduce_to_field(h1) == reduce_to_field(g1) and reduce_to_field(h2) == reduce_to_field(g2)


def test_hensel_lift_keeps_determinant_one(rng):
    R = Zmod(7, 4)
    done = 0
    while done < 10:
        g1, g2 = random_sl(rng, R, 3), random_sl(rng, R, 3)
        if not commutator_derivative(g1, g2).is_surjective:
            continue
        E = random_sl(rng, R, 3)
        E = RMatrix.from_ints(R, [[(x if i == j else 0) + 7 * y for j, (x, y) in enumerate(zip([1] * 3, r))]
                                   for i, r in enumerate(E.to_ints())])
        E = RMatrix(R, (tuple(x * pow(det(E).value, -1, R.q) % R.q for x in E.rows[0]),) + E.rows[1:])
        target = commutator(g1, g2) @ E
        h1, h2 = hensel_lift_commutator(g1, g2, target)
        assert commutator(h1, h2) == target and is_in_sl(h1) and is_in_sl(h2)
        done += 1


def test_scalar_commutator_at_residue_level():
    w = scalar_commutator(4, RMatrix.scalar(F5, 2, 4))
    # the two matrices of the primitive pair, rescaled into SL_2 (2^2 = 4 = det^-1)
    assert (w.g1, w.g2) == (RMatrix.diag(F5, [2, 3]), RMatrix.from_ints(F5, [[0, 2], [2, 0]]))
    assert w.verify()


def test_scalar_commutator_lifts():
    A = RMatrix.from_ints(R25, [[24, 5], [0, 24]])
    assert scalar_commutator(4, A).verify()


def test_scalar_commutator_rejections():
    with pytest.raises(HypothesisViolated):
        scalar_commutator(4, RMatrix.from_ints(R25, [[24, 1], [0, 24]]))
    with pytest.raises(NotCovered):
        scalar_commutator(1, RMatrix.identity(R25, 2))


def test_base_pair_routes():
    assert scalar_base_pair(4, 2, 5).route == "rescaled"
    for lam, n, p in ((6, 2, 7), (5, 4, 13)):
        bp = scalar_base_pair(lam, n, p)
        assert bp.route == "centralizer-search"
        F = Zmod(p)
        assert commutator(bp.g1, bp.g2) == RMatrix.scalar(F, n, lam)
        assert is_in_sl(bp.g1) and is_in_sl(bp.g2)
        assert not has_common_fixed_covector(bp.g1, bp.g2)
    seeded = scalar_base_pair(6, 2, 7, seed=3)
    assert commutator(seeded.g1, seeded.g2) == RMatrix.scalar(Zmod(7), 2, 6)


def test_obstruction_scan_examples():
    for p in (2, 3):
        report = obstruction_scan(RMatrix.identity(Zmod(p), 2))
        assert report.all_pairs_obstructed and report.witness_pair is None
    report = obstruction_scan(RMatrix.scalar(F5, 2, 4))
    assert not report.all_pairs_obstructed
    g1, g2 = report.witness_pair
    assert commutator(g1, g2) == RMatrix.scalar(F5, 2, 4)
    assert not has_common_fixed_covector(g1, g2)
    G = sl_group(2, 5)
    sl_pair = (G.index_of(RMatrix.diag(F5, [2, 3])), G.index_of(RMatrix.from_ints(F5, [[0, 2], [2, 0]])))
    assert sl_pair in report.solution_pairs


def test_obstruction_scan_parallel_matches_serial():
    target = RMatrix.identity(Zmod(3), 2)
    a, b = obstruction_scan(target), obstruction_scan(target, jobs=2)
    assert (a.solutions, a.obstructed) == (b.solutions, b.obstructed)


def test_nilpotent_checks():
    for p in (2, 3):
        report = nilpotent_noncommutator_check(2, p)
        assert report.certified
        assert report.max_image_rank < 3
    assert nilpotent_noncommutator_check(2, 2).ring.order == 2**9
    with pytest.raises(PreconditionUnverified):
        nilpotent_noncommutator_check(2, 5, RMatrix.scalar(F5, 2, 4))


def test_nilpotent_check_at_p5_identity():
    # commuting pairs in SL_2 over an odd field always share a centralizer element
    report = nilpotent_noncommutator_check(2, 5)
    assert report.certified and report.pairs_checked == 1080


def test_surjectivity_criterion_random_sl3(rng):
    F = Zmod(5)
    for _ in range(40):
        g1, g2 = random_sl(rng, F, 3), random_sl(rng, F, 3)
        surj = commutator_derivative(g1, g2).is_surjective
        assert surj == (not has_common_fixed_covector(g1, g2))
