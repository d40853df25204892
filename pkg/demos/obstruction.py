"""
When the identity is not a commutator
=====================================

Over F_2 every commuting pair in SL_2 has a common fixed covector, so the
derivative of the commutator map is never onto. Over a large enough
square-zero extension O of F_2 this produces an element of SL_2(O) that is
not a commutator.
"""

from commlift import RMatrix, Zmod, nilpotent_noncommutator_check, obstruction_scan

for p in (2, 3, 5):
    r = obstruction_scan(RMatrix.identity(Zmod(p), 2))
    print(f"p={p}: {r.solutions} commuting pairs, {r.obstructed} obstructed")

report = nilpotent_noncommutator_check(2, 2)
print("ring:", report.ring.token, "of order", report.ring.order)
print("certified non-commutator:", report.certified)
print("largest derivative rank:", report.max_image_rank, "of", 3)

# a scalar target with unobstructed pairs cannot be certified this way
r = obstruction_scan(RMatrix.scalar(Zmod(5), 2, 4))
print("4I over F_5 has an unobstructed pair:", not r.all_pairs_obstructed)
