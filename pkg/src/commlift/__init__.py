"""Commutator witnesses and word maps for SL_n over truncated local rings.

The usual entry points::

    from commlift import Zmod, RMatrix, commutator_witness
    A = RMatrix.from_ints(Zmod(5, 2), [[6, 1], [5, 1]])
    w = commutator_witness(A)
    assert w.verify()
"""

from .commdecomp import commutator_witness, cyclic_conjugator, diagonalize_via_unipotents, psl_commutator
from .errors import CommliftError
from .henselift import (
    commutator_derivative,
    hensel_lift_commutator,
    nilpotent_noncommutator_check,
    obstruction_scan,
    scalar_commutator,
)
from .localring import NilExt, RingElem, Zmod
from .matlinalg import RMatrix, commutator
from .witness import CommutatorWitness, verify_witness
from .wordmaps import Word, evaluate_word, parse_word, word_derivative, word_image

__version__ = "0.1.0"

__all__ = [
    "CommliftError",
    "CommutatorWitness",
    "NilExt",
    "RMatrix",
    "RingElem",
    "Word",
    "Zmod",
    "commutator",
    "commutator_derivative",
    "commutator_witness",
    "cyclic_conjugator",
    "diagonalize_via_unipotents",
    "evaluate_word",
    "hensel_lift_commutator",
    "nilpotent_noncommutator_check",
    "obstruction_scan",
    "parse_word",
    "psl_commutator",
    "scalar_commutator",
    "verify_witness",
    "word_derivative",
    "word_image",
]
