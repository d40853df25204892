"""
Scalar targets and PSL
======================

Lifts of lambda*I, with lambda of order exactly n mod p, are reached by
lifting an unobstructed residue pair level by level. Scalar-mod-p elements
of PSL_n are handled by multiplying by a root of unity first.
"""

from commlift import RMatrix, Zmod, commutator, psl_commutator, scalar_commutator
from commlift.henselift import commutator_derivative, scalar_base_pair

# the diagonal/cycle pair, rescaled into SL_2(F_5)
bp = scalar_base_pair(4, 2, 5)
print(bp.route, bp.g1.to_ints(), bp.g2.to_ints())
print("derivative surjective:", commutator_derivative(bp.g1, bp.g2).is_surjective)

# at p = 7 the rescaling needs a square root of -1, which does not exist
bp = scalar_base_pair(6, 2, 7)
print(bp.route, "after", bp.candidates_tried, "candidates")

R = Zmod(5, 3)
A = RMatrix.from_ints(R, [[124, 5], [0, 124]])
w = scalar_commutator(4, A)
print("[g1, g2] == A:", commutator(w.g1, w.g2) == A)

# the identity of PSL_2(Z/25): a witness for -I, equal to I up to sign
w = psl_commutator(RMatrix.identity(Zmod(5, 2), 2))
print("PSL witness, scalar factor", w.scalar_factor(), "valid:", w.verify())
