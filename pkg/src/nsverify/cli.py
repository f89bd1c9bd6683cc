"""Command-line front end.

Exit codes: 0 success, 1 operational error (I/O, parse, unknown name),
2 input semantics (non-algebra with ``--no-closure``, inconsistent
dimensions, non-unitary decoder), 3 verification failed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import serialize as ser
from .decomp import DecompositionError, decompose
from .linalg import ATOL
from .opspace import ErrorAlgebra, algebra_closure, commutant, contains, span_of
from .spin_example import (SCENARIOS, ScenarioBundle, axis_algebra, axis_channels,
                           default_code, default_decoder, kraus_errors)
from .verify import (Classification, CodeSpec, Tolerances, VerificationError,
                     classify, reachable_space, theorem_oracle, verify_stability)

EXIT_OK, EXIT_OPERATIONAL, EXIT_SEMANTIC, EXIT_FAILED = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _tolerances(args) -> Tolerances:
    tol = args.tol
    if tol is None:
        env = os.environ.get("NSVERIFY_TOL")
        try:
            tol = float(env) if env else ATOL
        except ValueError:
            raise CliError(f"NSVERIFY_TOL is not a number: {env!r}", EXIT_OPERATIONAL)
    if not tol > 0:
        raise CliError("tolerance must be positive", EXIT_OPERATIONAL)
    return Tolerances(atol=tol, deficit=10 * tol, oracle=10 * tol)


def _load(path):
    if not Path(path).exists():
        raise CliError(f"{path}: no such file", EXIT_OPERATIONAL)
    try:
        return ser.load_json(path)
    except ser.FormatError as exc:
        raise CliError(str(exc), EXIT_OPERATIONAL)


def _emit(args, doc: dict, summary: str):
    text = ser.dumps(doc)
    if args.output:
        try:
            Path(args.output).write_text(text + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc}", EXIT_OPERATIONAL)
    if args.format == "text":
        print(summary)
    elif not args.output:
        print(text)


def cmd_decompose(args) -> int:
    if not args.input:
        raise CliError("decompose needs --input (generator list)", EXIT_OPERATIONAL)
    try:
        ops, _ = ser.operators_from_json(_load(args.input))
        if not ops:
            raise CliError("generator list is empty", EXIT_SEMANTIC)
        space = span_of(ops)
    except ser.FormatError as exc:
        raise CliError(f"{args.input}: {exc}", EXIT_OPERATIONAL)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC)
    if args.no_closure:
        alg = ErrorAlgebra.from_space(space)
        if not alg.flags.all():
            raise CliError(f"generators do not span a unital *-algebra: {alg.flags._asdict()}",
                           EXIT_SEMANTIC)
    else:
        alg = algebra_closure(space, include_identity=True)
    try:
        dec = decompose(alg, seed=args.seed)
    except DecompositionError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC)
    doc = {
        "algebra_dim": alg.dim,
        "commutant_dim": commutant(alg).dim,
        "block_shapes": [list(s) for s in dec.block_shapes()],
        "decomposition": ser.decomposition_to_json(dec),
        "seed": args.seed,
    }
    lines = [f"algebra dim {alg.dim}, commutant dim {doc['commutant_dim']}",
             "  mult  irrep"]
    lines += [f"  {m:>4}  {n:>5}" for m, n in dec.block_shapes()]
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def _load_algebras(path) -> dict:
    obj = _load(path)
    try:
        if isinstance(obj, dict) and "algebras" in obj:
            return {name: algebra_closure(span_of(ser.operators_from_json(g)[0]))
                    for name, g in obj["algebras"].items()}
        ops, _ = ser.operators_from_json(obj)
        return {"A": algebra_closure(span_of(ops))}
    except ser.FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_OPERATIONAL)


def cmd_verify(args) -> int:
    """Run stability, reachable-space and oracle checks.

    Missing inputs fall back to the built-in three-qubit example: default
    decoder, the ``|+1/2>`` encoder, the 12 single-axis Kraus operators and
    the three single-axis algebras.
    """
    tol = _tolerances(args)
    try:
        d_map = ser.decoder_from_json(_load(args.decoder)) if args.decoder else default_decoder()
        if args.encoder:
            code = CodeSpec(ser.matrix_from_json(_load(args.encoder)))
        else:
            code = default_code()
        if args.errors:
            ops, labels = ser.operators_from_json(_load(args.errors))
            algebras = _load_algebras(args.input) if args.input else {}
        else:
            chans = axis_channels()
            ops, labels = kraus_errors(chans, "xyz")
            algebras = (_load_algebras(args.input) if args.input
                        else {f"A_{u}": axis_algebra(chans[u]) for u in "xyz"})
        base = verify_stability(d_map, code, ops, labels, tol, jobs=args.jobs)
    except ser.FormatError as exc:
        raise CliError(str(exc), EXIT_OPERATIONAL)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC)
    base.label = "E"
    bundle = ScenarioBundle("verify", reports={"E": base})
    error_space = span_of(ops)
    for name, alg in algebras.items():
        if alg.ambient_dim != d_map.dim:
            raise CliError(f"algebra {name} has dim {alg.ambient_dim}, expected {d_map.dim}",
                           EXIT_SEMANTIC)
        bundle.containments[f"E >= {name}"] = contains(error_space, alg.space, 1e-8)
        rep = verify_stability(d_map, code, alg.space, tol=tol, jobs=args.jobs)
        rep.label = name
        if rep.classification is None:
            rep.v_space = reachable_space(alg, d_map, code, rep, tol)
            rep.classification = classify(rep.v_space, d_map.dim_y)
            bundle.oracle[name] = theorem_oracle(alg, d_map, rep.v_space, tol.oracle)
            rep.oracle_residual = bundle.oracle[name].residual
        bundle.reports[name] = rep
    ok = bundle.ok and base.max_deficit <= tol.deficit
    bundle.verdict = "verified" if ok else Classification.FAILED.value
    doc = ser.bundle_to_json(bundle)
    _emit(args, doc, _summary(bundle))
    return EXIT_OK if ok else EXIT_FAILED


def _summary(bundle: ScenarioBundle) -> str:
    lines = [f"scenario: {bundle.name}", f"{'set':<12}{'dim V':>6}  {'class':<14}{'max deficit':>12}  oracle"]
    for name, rep in bundle.reports.items():
        dim_v = "-" if rep.v_space is None else str(rep.v_space.dim)
        cls = "-" if rep.classification is None else rep.classification.value
        orc_txt = "-" if rep.oracle_residual is None else f"{rep.oracle_residual:.2e}"
        lines.append(f"{name:<12}{dim_v:>6}  {cls:<14}{rep.max_deficit:>12.2e}  {orc_txt}")
    for name, val in bundle.containments.items():
        lines.append(f"{name}: {'yes' if val else 'no'}")
    for name, o in bundle.oracle.items():
        lines.append(f"oracle {name}: {'pass' if o.passed else 'FAIL'} (residual {o.residual:.2e})")
    lines.append(f"verdict: {bundle.verdict}")
    return "\n".join(lines)


def cmd_example(args) -> int:
    if args.name not in SCENARIOS:
        raise CliError(f"unknown example {args.name!r}; choose from {sorted(SCENARIOS)}",
                       EXIT_OPERATIONAL)
    tol = _tolerances(args)
    try:
        d_map = ser.decoder_from_json(_load(args.decoder)) if args.decoder else None
    except ser.FormatError as exc:
        raise CliError(str(exc), EXIT_OPERATIONAL)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC)
    bundle = SCENARIOS[args.name](d_map=d_map, tol=tol, jobs=args.jobs)
    _emit(args, ser.bundle_to_json(bundle), _summary(bundle))
    return EXIT_OK if bundle.ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="operator / generator JSON file")
    common.add_argument("--decoder", help="decoder JSON {u_d, dim_q, dim_y}")
    common.add_argument("--encoder", help="encoder isometry JSON matrix")
    common.add_argument("--errors", help="error basis JSON (operators or channels)")
    common.add_argument("--tol", type=float, default=None,
                        help="equality tolerance (default 1e-9 or $NSVERIFY_TOL)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker threads for error checks")
    common.add_argument("--output", help="write JSON here instead of stdout")
    common.add_argument("--no-closure", action="store_true",
                        help="reject generator sets that are not already an algebra")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nsverify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common], help="Wedderburn blocks of an algebra")
    sub.add_parser("verify", parents=[common], help="verify a decoder against error sets")
    ex = sub.add_parser("example", parents=[common], help="run a built-in three-qubit scenario")
    ex.add_argument("name", help="single-axis, composite or two-reference")
    return parser


COMMANDS = {"decompose": cmd_decompose, "verify": cmd_verify, "example": cmd_example}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"nsverify: error: {exc}", file=sys.stderr)
        return exc.code
    except VerificationError as exc:
        print(f"nsverify: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
