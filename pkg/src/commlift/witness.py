"""Commutator witnesses, decomposition traces, and the witness file format.

A witness file is a single JSON object::

    {"ring": "Zmod(5^2)", "mode": "SL" | "PSL",
     "target": <matrix>, "g1": <matrix>, "g2": <matrix>,
     "trace": {"g": ..., "X": ..., "Y": ..., "D": ..., "targets": [...]}}

where each matrix uses the interchange format of
:func:`commlift.matlinalg.matrix_to_json`. ``trace`` is optional.
:func:`verify_witness_document` re-checks a parsed file from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CommliftError, FormatError
from .localring import ring_from_token
from .matlinalg import (
    RMatrix,
    commutator,
    det_raw,
    inverse,
    is_diagonal,
    is_invertible,
    is_scalar,
    is_unit_lower,
    is_unit_upper,
    matrix_from_json,
    matrix_to_json,
    reduce_precision,
)

SL = "SL"
GL = "GL-pair-for-PSL"


@dataclass(frozen=True)
class DecompositionTrace:
    """``X (g A g^-1) Y = D`` with X unit lower, Y unit upper, D = diag(targets)."""

    g: RMatrix
    X: RMatrix
    Y: RMatrix
    D: RMatrix
    targets: tuple

    def holds_for(self, A: RMatrix) -> bool:
        return (
            is_unit_lower(self.X)
            and is_unit_upper(self.Y)
            and is_diagonal(self.D)
            and list(self.D.diagonal()) == list(self.targets)
            and is_invertible(self.g)
            and self.X @ A.conj(self.g) @ self.Y == self.D
        )

    def to_json(self) -> dict:
        return {
            "g": matrix_to_json(self.g),
            "X": matrix_to_json(self.X),
            "Y": matrix_to_json(self.Y),
            "D": matrix_to_json(self.D),
            "targets": [self.D.ring.to_json(t) for t in self.targets],
        }

    @classmethod
    def from_json(cls, obj: dict, ring=None) -> "DecompositionTrace":
        try:
            mats = {key: matrix_from_json(obj[key], ring) for key in ("g", "X", "Y", "D")}
            targets = tuple(mats["D"].ring.from_json(t) for t in obj["targets"])
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed trace: {exc}") from None
        return cls(targets=targets, **mats)


@dataclass(frozen=True)
class CommutatorWitness:
    target: RMatrix
    g1: RMatrix
    g2: RMatrix
    mode: str = "SL"
    trace: DecompositionTrace | None = field(default=None, compare=False)

    @property
    def ring(self):
        return self.target.ring

    @property
    def location(self) -> str:
        one = self.ring.one
        if det_raw(self.ring, self.g1.rows) == one and det_raw(self.ring, self.g2.rows) == one:
            return SL
        return GL

    def scalar_factor(self):
        """The raw scalar ``zeta`` with ``[g1, g2] = zeta * target``, or ``None``."""
        c = commutator(self.g1, self.g2) @ inverse(self.target)
        return c.rows[0][0] if is_scalar(c) else None

    def verify(self) -> bool:
        return verify_witness(self)

    def reduce(self, k: int) -> "CommutatorWitness":
        """The same witness read at a lower precision."""
        red = lambda m: reduce_precision(m, k)  # noqa: E731
        return CommutatorWitness(red(self.target), red(self.g1), red(self.g2), self.mode)

    def to_json(self, include_trace: bool = True) -> dict:
        doc = {
            "ring": self.ring.token,
            "mode": self.mode,
            "target": matrix_to_json(self.target),
            "g1": matrix_to_json(self.g1),
            "g2": matrix_to_json(self.g2),
        }
        if include_trace and self.trace is not None:
            doc["trace"] = self.trace.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "CommutatorWitness":
        if not isinstance(doc, dict):
            raise FormatError("witness must be a JSON object")
        try:
            ring = ring_from_token(doc["ring"])
            mode = doc["mode"]
            target = matrix_from_json(doc["target"], ring)
            g1 = matrix_from_json(doc["g1"], ring)
            g2 = matrix_from_json(doc["g2"], ring)
        except KeyError as exc:
            raise FormatError(f"witness is missing field {exc}") from None
        if mode not in ("SL", "PSL"):
            raise FormatError(f"unknown mode {mode!r}")
        if not (target.n == g1.n == g2.n):
            raise FormatError("matrix dimensions disagree")
        trace = DecompositionTrace.from_json(doc["trace"], ring) if doc.get("trace") is not None else None
        return cls(target, g1, g2, mode, trace)


def verify_witness(w: CommutatorWitness) -> bool:
    """Exact re-check of a witness; no tolerance anywhere.

    * target, g1, g2 all have determinant exactly 1;
    * SL mode: ``[g1, g2] == target``;
    * PSL mode: ``[g1, g2] == zeta * target`` for a scalar with ``zeta^n = 1``;
    * if a trace is attached, its identity holds for the target.
    """
    ring = w.ring
    one = ring.one
    for m in (w.target, w.g1, w.g2):
        if det_raw(ring, m.rows) != one:
            return False
    c = commutator(w.g1, w.g2)
    if w.mode == "SL":
        ok = c == w.target
    else:
        zeta = w.scalar_factor()
        ok = zeta is not None and _power(ring, zeta, w.target.n) == one
    if ok and w.trace is not None:
        ok = w.trace.holds_for(w.target)
    return ok


def _power(ring, x, e: int):
    out = ring.one
    for _ in range(e):
        out = ring.mul(out, x)
    return out


def verify_witness_document(doc: dict) -> dict:
    """Parse and verify; returns a small JSON report instead of raising."""
    try:
        w = CommutatorWitness.from_json(doc)
    except (CommliftError, ValueError) as exc:
        return {"valid": False, "reason": f"unparseable witness: {exc}"}
    ok = verify_witness(w)
    return {"valid": ok, "ring": w.ring.token, "mode": w.mode, "n": w.target.n, "has_trace": w.trace is not None}
