"""Exact arithmetic in the local rings used throughout the package.

Two kinds of ring are supported:

* :class:`Zmod` -- the truncated p-adic integers ``Z/p^k`` (``k = 1`` is the
  residue field ``F_p``). Raw elements are Python ints in ``[0, p^k)``.
* :class:`NilExt` -- ``F_p`` extended by labelled generators ``e_x`` whose
  pairwise products all vanish. Raw elements are tuples
  ``(c, a_1, ..., a_m)`` meaning ``c + sum a_i e_i``. With a single generator
  this is the ring of dual numbers ``F_p[eps]/(eps^2)``.

Matrix code works on raw values through the ring's methods (``add``, ``mul``,
``inv``...). :class:`RingElem` is a thin immutable wrapper for callers that
want operator syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormatError, NoSuchRoot, NotAUnit, RingMismatch

# p^k must fit in a double-width machine word
_MAX_MODULUS = 1 << 128


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Zmod:
    """The ring ``Z/p^k``."""

    p: int
    k: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.k < 1:
            raise ValueError("precision k must be >= 1")
        if self.p**self.k >= _MAX_MODULUS:
            raise ValueError("p^k exceeds the supported word size")
        object.__setattr__(self, "q", self.p**self.k)

    # -- descriptor ---------------------------------------------------------
    @property
    def token(self) -> str:
        return f"Zmod({self.p}^{self.k})"

    @property
    def is_field(self) -> bool:
        return self.k == 1

    def residue_field(self) -> "Zmod":
        return Zmod(self.p, 1)

    def with_precision(self, k: int) -> "Zmod":
        return Zmod(self.p, k)

    def __repr__(self):
        return self.token

    # -- raw arithmetic -----------------------------------------------------
    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def from_int(self, v: int) -> int:
        return v % self.q

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def neg(self, a):
        return -a % self.q

    def mul(self, a, b):
        return a * b % self.q

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        return a % self.p != 0

    def inv(self, a):
        if a % self.p == 0:
            raise NotAUnit(f"{a} is not a unit in {self.token}")
        return pow(a, -1, self.q)

    def residue(self, a) -> int:
        return a % self.p

    def valuation(self, a) -> int:
        if a == 0:
            return self.k
        v = 0
        while a % self.p == 0:
            a //= self.p
            v += 1
        return v

    def canonical(self, a) -> bool:
        return isinstance(a, int) and 0 <= a < self.q

    def to_json(self, a):
        return a

    def from_json(self, obj):
        if isinstance(obj, bool) or not isinstance(obj, int):
            raise FormatError(f"entry {obj!r} is not an integer")
        return obj % self.q


@dataclass(frozen=True)
class NilExt:
    """``F_p`` plus square-zero generators: ``e_x e_y = 0`` for all x, y."""

    p: int
    gens: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "gens", tuple(self.gens))
        if len(set(self.gens)) != len(self.gens):
            raise ValueError("generator labels must be distinct")

    @property
    def k(self) -> int:
        # nilpotency index of the maximal ideal
        return 2 if self.gens else 1

    @property
    def token(self) -> str:
        return f"Nilext({self.p}; {len(self.gens)} gens)"

    @property
    def is_field(self) -> bool:
        return not self.gens

    @property
    def order(self) -> int:
        return self.p ** (len(self.gens) + 1)

    def residue_field(self) -> Zmod:
        return Zmod(self.p, 1)

    def __repr__(self):
        return self.token

    @property
    def zero(self):
        return (0,) * (len(self.gens) + 1)

    @property
    def one(self):
        return (1,) + (0,) * len(self.gens)

    def from_int(self, v: int):
        return (v % self.p,) + (0,) * len(self.gens)

    def gen(self, label):
        i = self.gens.index(label)
        out = [0] * (len(self.gens) + 1)
        out[i + 1] = 1
        return tuple(out)

    def make(self, constant: int, coeffs: dict | None = None):
        out = [constant % self.p] + [0] * len(self.gens)
        for label, c in (coeffs or {}).items():
            out[self.gens.index(label) + 1] = c % self.p
        return tuple(out)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple(-x % p for x in a)

    def mul(self, a, b):
        p = self.p
        c1, c2 = a[0], b[0]
        return ((c1 * c2) % p,) + tuple(
            (c1 * y + c2 * x) % p for x, y in zip(a[1:], b[1:])
        )

    def is_zero(self, a) -> bool:
        return not any(a)

    def is_unit(self, a) -> bool:
        return a[0] % self.p != 0

    def inv(self, a):
        if a[0] % self.p == 0:
            raise NotAUnit(f"{a} is not a unit in {self.token}")
        p = self.p
        ci = pow(a[0], -1, p)
        ci2 = ci * ci % p
        return (ci,) + tuple(-x * ci2 % p for x in a[1:])

    def residue(self, a) -> int:
        return a[0]

    def valuation(self, a) -> int:
        if a[0]:
            return 0
        return 1 if any(a[1:]) else 2

    def canonical(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == len(self.gens) + 1
            and all(isinstance(x, int) and 0 <= x < self.p for x in a)
        )

    def to_json(self, a):
        return list(a)

    def from_json(self, obj):
        if not isinstance(obj, list) or len(obj) != len(self.gens) + 1:
            raise FormatError(f"entry {obj!r} is not a Nilext coefficient list")
        return tuple(int(x) % self.p for x in obj)


Ring = Zmod | NilExt

_ZMOD_RE = re.compile(r"^\s*Zmod\(\s*(\d+)\s*\^\s*(\d+)\s*\)\s*$")
_NILEXT_RE = re.compile(r"^\s*Nilext\(\s*(\d+)\s*;\s*(\d+)\s*gens\s*\)\s*$")


def ring_from_token(token: str) -> Ring:
    """Parse ``"Zmod(5^3)"`` or ``"Nilext(2; 8 gens)"``.

    Nilext generator labels are not part of the token; they come back as
    ``e0, e1, ...``.
    """
    m = _ZMOD_RE.match(token)
    if m:
        return Zmod(int(m.group(1)), int(m.group(2)))
    m = _NILEXT_RE.match(token)
    if m:
        return NilExt(int(m.group(1)), tuple(f"e{i}" for i in range(int(m.group(2)))))
    raise FormatError(f"unrecognised ring descriptor {token!r}")


@dataclass(frozen=True)
class RingElem:
    ring: Ring
    value: object

    @classmethod
    def of(cls, ring: Ring, v) -> "RingElem":
        if isinstance(v, int):
            return cls(ring, ring.from_int(v))
        return cls(ring, v)

    def _coerce(self, other) -> object:
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring.token} vs {other.ring.token}")
            return other.value
        if isinstance(other, int):
            return self.ring.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RingElem(self.ring, self.ring.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RingElem(self.ring, self.ring.sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RingElem(self.ring, self.ring.sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else RingElem(self.ring, self.ring.mul(self.value, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring, self.ring.neg(self.value))

    def __pow__(self, e: int):
        if e < 0:
            return invert(self) ** (-e)
        out, base = self.ring.one, self.value
        while e:
            if e & 1:
                out = self.ring.mul(out, base)
            base = self.ring.mul(base, base)
            e >>= 1
        return RingElem(self.ring, out)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == self.ring.from_int(other)
        if isinstance(other, RingElem):
            return self.ring == other.ring and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, self.value))

    def __int__(self):
        if not isinstance(self.ring, Zmod):
            raise TypeError("only Zmod elements convert to int")
        return self.value

    def __repr__(self):
        return f"{self.value!r} in {self.ring.token}"

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def valuation(self) -> int:
        return self.ring.valuation(self.value)

    def inverse(self) -> "RingElem":
        return invert(self)

    def residue(self) -> "RingElem":
        return reduce_to_field(self)


def invert(x: RingElem) -> RingElem:
    """Multiplicative inverse; raises :class:`NotAUnit` if the residue is 0."""
    return RingElem(x.ring, x.ring.inv(x.value))


def reduce_to_field(x: RingElem) -> RingElem:
    field = x.ring.residue_field()
    return RingElem(field, x.ring.residue(x.value))


def canonical_lift(x: RingElem, ring: Zmod) -> RingElem:
    """Lift an ``F_p`` element to its least nonnegative representative in ``ring``."""
    if x.ring.p != ring.p:
        raise RingMismatch("lift across different primes")
    return RingElem(ring, ring.from_int(x.ring.residue(x.value)))


def multiplicative_order(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise NotAUnit("0 has no multiplicative order")
    x, n = a, 1
    while x != 1:
        x = x * a % p
        n += 1
    return n


def primitive_root_of_unity(n: int, p: int) -> RingElem:
    """Smallest element of ``F_p`` with multiplicative order exactly ``n``."""
    if n < 1 or (p - 1) % n:
        raise NoSuchRoot(f"{n} does not divide {p} - 1")
    for a in range(1, p):
        if multiplicative_order(a, p) == n:
            return RingElem(Zmod(p, 1), a)
    raise NoSuchRoot(f"no element of order {n} mod {p}")  # unreachable for prime p


def solve_power(c: RingElem | int, n: int, p: int | None = None) -> RingElem | None:
    """Smallest ``mu`` in ``F_p^x`` with ``mu^n = c``, or ``None``."""
    if isinstance(c, RingElem):
        p = c.ring.p
        c = c.ring.residue(c.value)
    if p is None:
        raise ValueError("p is required for an int argument")
    c %= p
    if c == 0:
        raise ValueError("c must be nonzero")
    for mu in range(1, p):
        if pow(mu, n, p) == c:
            return RingElem(Zmod(p, 1), mu)
    return None


def teichmuller(a: int, ring: Zmod) -> int:
    """The root of unity in ``Z/p^k`` congruent to ``a`` mod p (a unit)."""
    if a % ring.p == 0:
        raise NotAUnit("Teichmuller lift of a non-unit")
    x = a % ring.q
    # x -> x^p converges to the Teichmuller representative in k-1 steps
    for _ in range(ring.k):
        x = pow(x, ring.p, ring.q)
    return x

