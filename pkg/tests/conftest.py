import itertools
import random
import sys

import pytest

from commlift.localring import Zmod
from commlift.matlinalg import RMatrix, is_scalar_mod_m


def random_sl(rng: random.Random, ring: Zmod, n: int) -> RMatrix:
    """Uniform-ish element of SL_n(Z/p^k): random invertible matrix, first row rescaled."""
    while True:
        rows = [[rng.randrange(ring.q) for _ in range(n)] for _ in range(n)]
        M = RMatrix.from_ints(ring, rows)
        d = M.det().value
        if d % ring.p:
            u = pow(d, -1, ring.q)
            return RMatrix(ring, (tuple(x * u % ring.q for x in M.rows[0]),) + M.rows[1:])


def random_nonscalar_sl(rng, ring, n):
    while True:
        A = random_sl(rng, ring, n)
        if not is_scalar_mod_m(A):
            return A


def scalar_lift(rng, ring, n, zeta):
    """Random A = zeta I mod p with det(A) = 1 (zeta^n = 1 exactly)."""
    rows = [[(zeta if i == j else 0) + ring.p * rng.randrange(ring.q) for j in range(n)] for i in range(n)]
    M = RMatrix.from_ints(ring, rows)
    u = pow(M.det().value, -1, ring.q)
    return RMatrix(ring, (tuple(x * u % ring.q for x in M.rows[0]),) + M.rows[1:])


def brute_sl2(p):
    """SL_2(F_p) as plain 4-tuples, independent of the numpy tables."""
    return [t for t in itertools.product(range(p), repeat=4) if (t[0] * t[3] - t[1] * t[2]) % p == 1]


def mul2(x, y, p):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p)


def inv2(x, p):
    a, b, c, d = x
    return (d, -b % p, -c % p, a)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
