import pytest
from hypothesis import given, strategies as st

from commlift.errors import FormatError, NoSuchRoot, NotAUnit, RingMismatch
from commlift.localring import (
    NilExt,
    RingElem,
    Zmod,
    canonical_lift,
    invert,
    multiplicative_order,
    primitive_root_of_unity,
    reduce_to_field,
    ring_from_token,
    solve_power,
    teichmuller,
)


def test_invert_examples():
    R = Zmod(5, 2)
    assert invert(RingElem.of(R, 2)) == 13
    assert invert(RingElem.of(R, 1)) == 1
    assert invert(RingElem.of(Zmod(5), 4)) == 4


def test_invert_nonunit():
    with pytest.raises(NotAUnit):
        invert(RingElem.of(Zmod(5, 2), 10))


def test_reduce_to_field():
    R = Zmod(5, 2)
    assert reduce_to_field(RingElem.of(R, 13)) == RingElem.of(Zmod(5), 3)
    assert reduce_to_field(RingElem.of(R, 25)).value == 0


def test_nilext_residue_and_products():
    O = NilExt(3, ("a", "b"))
    x = RingElem(O, O.make(2, {"a": 1}))
    y = RingElem(O, O.make(1, {"b": 2}))
    assert reduce_to_field(x).value == 2
    # e_a e_b = 0, so (2 + e_a)(1 + 2 e_b) = 2 + e_a + 4 e_b
    assert (x * y).value == (2, 1, 1)
    assert (x * x.inverse()).value == O.one
    with pytest.raises(NotAUnit):
        RingElem(O, O.gen("a")).inverse()


def test_primitive_roots_and_powers():
    assert primitive_root_of_unity(2, 5) == 4
    assert primitive_root_of_unity(3, 7) == 2
    with pytest.raises(NoSuchRoot):
        primitive_root_of_unity(4, 7)
    assert solve_power(4, 2, 5) == 2
    assert solve_power(1, 3, 7) == 1
    assert solve_power(6, 2, 7) is None


def test_tokens_round_trip():
    for ring in (Zmod(5, 3), Zmod(2, 1)):
        assert ring_from_token(ring.token) == ring
    assert ring_from_token("Nilext(2; 8 gens)").order == 2**9
    with pytest.raises(FormatError):
        ring_from_token("GF(4)")


def test_ring_mismatch():
    with pytest.raises(RingMismatch):
        RingElem.of(Zmod(5, 2), 1) + RingElem.of(Zmod(5, 1), 1)


def test_canonical_lift():
    assert canonical_lift(RingElem.of(Zmod(7), 3), Zmod(7, 3)).value == 3


@given(st.sampled_from([2, 3, 5, 7, 13]), st.integers(1, 5), st.integers())
def test_inverse_property(p, k, a):
    R = Zmod(p, k)
    x = RingElem.of(R, a)
    if x.is_unit():
        assert x * x.inverse() == 1
    else:
        assert x.valuation() >= 1


@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 4), st.integers(1, 10**6))
def test_teichmuller(p, k, a):
    if a % p == 0:
        return
    R = Zmod(p, k)
    z = teichmuller(a, R)
    assert z % p == a % p
    assert pow(z, p - 1, R.q) == 1


def test_multiplicative_order():
    assert [multiplicative_order(a, 7) for a in range(1, 7)] == [1, 3, 6, 3, 6, 2]
