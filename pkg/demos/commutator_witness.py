"""
Writing a matrix as a commutator
================================

Any element of SL_n(Z/p^k) that is not scalar mod p is a commutator
[g1, g2] = g1 g2 g1^-1 g2^-1, as long as p > n + 1. This walks through the
construction on a small example.
"""

from commlift import RMatrix, Zmod, commutator, commutator_witness
from commlift.commdecomp import choose_balanced_targets

R = Zmod(5, 2)
A = RMatrix.from_ints(R, [[6, 1], [5, 1]])
print("A =", A.to_ints(), "det =", A.det())

# balanced targets: a_i a_{n+1-i} = 1 with distinct residues
a = choose_balanced_targets(2, R)
print("targets:", [t.value for t in a])

w = commutator_witness(A)
print("g1 =", w.g1.to_ints())
print("g2 =", w.g2.to_ints())
print("[g1, g2] == A:", commutator(w.g1, w.g2) == A)

# the trace records X (g A g^-1) Y = diag(a_i^2)
tr = w.trace
print("X g A g^-1 Y =", (tr.X @ A.conj(tr.g) @ tr.Y).to_ints())

# a witness at precision k reduces to one at any lower precision
print("reduces mod 5:", w.reduce(1).verify())

# a random 3x3 example over Z/7^4
import random

rng = random.Random(1)
R = Zmod(7, 4)
while True:
    M = RMatrix.from_ints(R, [[rng.randrange(R.q) for _ in range(3)] for _ in range(3)])
    d = M.det().value
    if d % 7:
        break
M = RMatrix(R, (tuple(x * pow(d, -1, R.q) % R.q for x in M.rows[0]),) + M.rows[1:])
print("3x3 witness verifies:", commutator_witness(M).verify())
