"""
Word maps on SL_2(F_p)
======================

Images of words are enumerated exactly on the finite group. Products of
word images cover the group quickly, even when a single image does not.
"""

from commlift import Zmod, commutator, parse_word, word_image
from commlift.matlinalg import RMatrix
from commlift.wordmaps import (
    check_class_product,
    check_double_cover_noncentral,
    find_regular_split_value,
    lift_word_value,
    not_submersive,
)

for p in (5, 7, 11):
    r = word_image(parse_word("[x1,x2]"), 2, p)
    print(f"commutators in SL(2, F_{p}): {r.image_size} of {r.group_order}")

sq = parse_word("x1^2")
for p in (5, 7):
    one = word_image(sq, 2, p)
    two = check_double_cover_noncentral(sq, sq, 2, p)
    print(f"p={p}: |x^2(G)| = {one.image_size}, x^2 x^2 covers non-central: {two.cover}")

F7 = Zmod(7)
print("class product covers:", check_class_product(2, 7, RMatrix.diag(F7, [3, 5]), RMatrix.diag(F7, [2, 4])))

# a commutator value that is regular split, at a point where the map is a submersion
comm = parse_word("[x1,x2]")
hit = find_regular_split_value(comm, 2, 7, avoid=not_submersive(comm))
print("regular split value", hit.value.to_ints(), "eigenvalues", hit.eigenvalues)

# and its lift to Z/7^3 onto a nearby target
R = Zmod(7, 3)
g1, g2 = (RMatrix.from_ints(R, g.to_ints()) for g in hit.values)
target = commutator(g1, g2) @ RMatrix.from_ints(R, [[8, 7], [0, pow(8, -1, R.q)]])
h1, h2 = lift_word_value(comm, [g1, g2], target)
print("lifted pair hits the target:", commutator(h1, h2) == target)
