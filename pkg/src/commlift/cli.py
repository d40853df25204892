"""Command line interface.

Every subcommand prints one JSON document (sorted keys) to stdout, or to
``--output``. Exit status: 0 on success with all exact checks passing,
1 for a domain error or a failed verification, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import commdecomp, henselift, wordmaps
from .errors import CommliftError, FormatError
from .localring import Zmod, primitive_root_of_unity, teichmuller
from .matlinalg import RMatrix, matrix_from_json
from .witness import CommutatorWitness, verify_witness, verify_witness_document

log = logging.getLogger("commlift")


class VerificationFailed(CommliftError):
    pass


def _load_json(value: str):
    text = value.strip()
    if not text.startswith(("[", "{")):
        text = Path(value).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None


def _load_matrix(value: str, p: int | None, k: int) -> RMatrix:
    """Inline rows ``[[..],[..]]`` (needs ``--p``), a matrix document, or a file holding either."""
    obj = _load_json(value)
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    if p is None:
        raise FormatError("bare rows need --p")
    ring = Zmod(p, k)
    if not (isinstance(obj, list) and all(isinstance(r, list) for r in obj)):
        raise FormatError("matrix must be a list of rows")
    return RMatrix.from_ints(ring, obj)


def _checked(w: CommutatorWitness) -> CommutatorWitness:
    if not verify_witness(w):
        raise VerificationFailed("produced witness failed exact re-verification")
    return w


def cmd_decompose(args) -> dict:
    A = _load_matrix(args.matrix, args.p, args.k)
    w = _checked(commdecomp.commutator_witness(A))
    return w.to_json(include_trace=args.trace)


def cmd_psl(args) -> dict:
    A = _load_matrix(args.matrix, args.p, args.k)
    w = _checked(commdecomp.psl_commutator(A))
    return w.to_json(include_trace=args.trace)


def cmd_scalar_lift(args) -> dict:
    if args.matrix is not None:
        A = _load_matrix(args.matrix, args.p, args.k)
        p, n = A.ring.p, A.n
    else:
        if args.p is None or args.n is None:
            raise FormatError("scalar-lift needs --matrix or both --p and --n")
        p, n = args.p, args.n
    lam = args.lam if args.lam is not None else primitive_root_of_unity(n, p).value
    if args.matrix is None:
        ring = Zmod(p, args.k)
        A = RMatrix.scalar(ring, n, teichmuller(lam, ring))
    base = henselift.scalar_base_pair(lam % p, n, p, seed=args.seed)
    w = _checked(henselift.scalar_commutator(lam, A, seed=args.seed))
    doc = w.to_json()
    doc["lambda"] = lam % p
    doc["base_route"] = base.route
    return doc


def cmd_verify(args) -> dict:
    doc = _load_json(args.witness)
    report = verify_witness_document(doc)
    if not report["valid"]:
        raise VerificationFailed(report.get("reason", "witness does not verify"))
    return report


def _word_args(texts):
    return [wordmaps.parse_word(t) for t in texts]


def cmd_word_image(args) -> dict:
    (w,) = _word_args([args.word])
    report = wordmaps.word_image(w, args.n, args.p, budget=args.budget, jobs=args.jobs)
    if not report.conjugation_closed:
        raise VerificationFailed("enumerated image is not conjugation-closed")
    return report.to_json()


def cmd_cover_check(args) -> dict:
    words = _word_args(args.words)
    if len(words) == 3:
        report = wordmaps.check_triple_cover(*words, args.n, args.p, budget=args.budget, jobs=args.jobs)
        kind = "triple"
    elif len(words) == 2:
        report = wordmaps.check_double_cover_noncentral(*words, args.n, args.p, budget=args.budget, jobs=args.jobs)
        kind = "double-noncentral"
    else:
        raise FormatError("cover-check takes two or three words")
    doc = report.to_json()
    doc["check"] = kind
    return doc


def cmd_class_product(args) -> dict:
    ring = Zmod(args.p, 1)
    t1 = RMatrix.diag(ring, _load_json(args.t1))
    t2 = RMatrix.diag(ring, _load_json(args.t2))
    if t1.n != args.n or t2.n != args.n:
        raise FormatError("torus diagonals must have n entries")
    ok = wordmaps.check_class_product(args.n, args.p, t1, t2)
    return {"group": f"SL({args.n}, F_{args.p})", "t1": t1.to_ints(), "t2": t2.to_ints(), "covers_noncentral": ok}


def _residue_target(args) -> RMatrix:
    if args.matrix is not None:
        return _load_matrix(args.matrix, args.p, 1)
    if args.p is None or args.n is None:
        raise FormatError("need --matrix or both --p and --n")
    return RMatrix.identity(Zmod(args.p, 1), args.n)


def cmd_obstruction(args) -> dict:
    gbar = _residue_target(args)
    return henselift.obstruction_scan(gbar, budget=args.budget, jobs=args.jobs).to_json()


def cmd_nilpotent_demo(args) -> dict:
    gbar = _residue_target(args)
    report = henselift.nilpotent_noncommutator_check(gbar.n, gbar.ring.p, gbar, budget=args.budget)
    if not report.certified:
        raise VerificationFailed("some commuting pair has a surjective derivative")
    return report.to_json()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commlift", description=__doc__.splitlines()[0])
    parser.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    parser.add_argument("--seed", type=int, default=None, help="shuffle the scalar base-pair search")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for enumerations")
    parser.add_argument("--budget", type=int, default=wordmaps.DEFAULT_TUPLE_BUDGET, help="enumeration budget")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def ring_opts(sp, need_n=False):
        sp.add_argument("--p", type=int)
        sp.add_argument("--k", type=int, default=1)
        sp.add_argument("--n", type=int, required=need_n)
        sp.add_argument("--matrix", help="inline JSON rows / matrix document, or a file path")

    for name, func, helptext in (
        ("decompose", cmd_decompose, "commutator witness for a non-scalar-mod-p element of SL_n(Z/p^k)"),
        ("psl", cmd_psl, "commutator witness for an element of PSL_n(Z/p^k)"),
    ):
        sp = sub.add_parser(name, help=helptext)
        ring_opts(sp)
        sp.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True)
        sp.set_defaults(func=func)

    sp = sub.add_parser("scalar-lift", help="witness for a lift of lambda*I, lambda of order n")
    ring_opts(sp)
    sp.add_argument("--lam", type=int)
    sp.set_defaults(func=cmd_scalar_lift)

    sp = sub.add_parser("verify", help="re-check a witness file from scratch")
    sp.add_argument("witness", help="witness JSON or path")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("word-image", help="exact image of a word on SL_n(F_p)")
    sp.add_argument("word")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--p", type=int, required=True)
    sp.set_defaults(func=cmd_word_image)

    sp = sub.add_parser("cover-check", help="product of two (non-central) or three word images")
    sp.add_argument("words", nargs="+")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--p", type=int, required=True)
    sp.set_defaults(func=cmd_cover_check)

    sp = sub.add_parser("class-product", help="product of two split regular classes")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--t1", required=True, help="diagonal entries, e.g. [2,3]")
    sp.add_argument("--t2", required=True)
    sp.set_defaults(func=cmd_class_product)

    for name, func, helptext in (
        ("obstruction", cmd_obstruction, "scan pairs with a given commutator for common fixed covectors"),
        ("nilpotent-demo", cmd_nilpotent_demo, "certify a non-commutator over a square-zero extension"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--p", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--matrix", help="residue target (default: identity)")
        sp.set_defaults(func=func, k=1)
    return parser


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        doc = args.func(args)
    except CommliftError as exc:
        log.debug("domain error", exc_info=True)
        _emit({"error": exc.code, "message": str(exc)}, args.output)
        return 1
    except (OSError, ValueError) as exc:
        # unreadable inputs and malformed arguments that slipped past argparse
        _emit({"error": "FormatError" if isinstance(exc, ValueError) else "IOError", "message": str(exc)}, args.output)
        return 1
    _emit(doc, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
