"""Command line interface.

Exit codes: 0 success, 2 validation error, 3 truncation error, 4 invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .cecobar import CoalgebraError, SignConventionError
from .freelie import LieAlgebraError, NotADifferential, TruncationError
from .models import ModelError
from .persist import PersistenceError, format_value, interleaving_distance
from .pipeline import (build_persistence_model, h_barcode, inclusion_certificate, pi_barcode,
                       stability_report)
from .qlinalg import LinearAlgebraError, NotAChainComplex, NotAChainMap
from .serialize import (SchemaError, barcode_to_json, dumps, load_barcode, load_complex,
                        model_from_json, model_to_json, read_json)

EXIT_OK, EXIT_VALIDATION, EXIT_TRUNCATION, EXIT_INVARIANT = 0, 2, 3, 4


class InvariantFailure(Exception):
    pass


def _truncation(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 3:
        raise argparse.ArgumentTypeError("truncation must be at least 3")
    return n


def _rational(text: str) -> Fraction:
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")
    if x < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return x


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def cmd_model_build(args) -> int:
    complex = load_complex(args.complex)
    model = build_persistence_model(complex, args.truncation, minimal=not args.free_only)
    _emit(dumps(model_to_json(model)), args.out)
    return EXIT_OK


def cmd_barcode(args) -> int:
    model = model_from_json(read_json(args.model))
    if args.mode == "pi":
        bc = pi_barcode(model)
    else:
        if not model.is_minimal():
            raise ModelError("h barcodes need a minimal model; rebuild without --free-only")
        bc = h_barcode(model)
    text = bc.to_csv() if args.format == "csv" else dumps(barcode_to_json(bc, args.mode))
    _emit(text, args.out)
    return EXIT_OK


def cmd_distance(args) -> int:
    d = interleaving_distance(load_barcode(args.a), load_barcode(args.b))
    _emit(format_value(d) + "\n", args.out)
    return EXIT_OK


def cmd_stability(args) -> int:
    x, y = load_complex(args.x), load_complex(args.y)
    mx = build_persistence_model(x, args.truncation)
    my = build_persistence_model(y, args.truncation)
    cert = None
    if args.certificate_delta is not None:
        cert = inclusion_certificate(mx, my, args.certificate_delta)
    report = stability_report(mx, my, args.truncation, shift=args.shift, certificate=cert)
    _emit(dumps(report.to_json()), args.out)
    if not report.passed:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        raise InvariantFailure(f"report checks failed: {failed}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest, write_artifacts

    results, artifacts = run_selftest(args.truncation, args.corpus)
    if args.out is not None:
        write_artifacts(artifacts, args.out)
    sys.stdout.write(artifacts["selftest.txt"])
    failed = [r for r in results if not r.passed]
    sys.stdout.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    if failed:
        raise InvariantFailure(f"{len(failed)} self-test checks failed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quillen-models",
                                description="Persistence Quillen models of filtered cell complexes.")
    sub = p.add_subparsers(dest="command", required=True)

    model = sub.add_parser("model", help="model operations")
    msub = model.add_subparsers(dest="action", required=True)
    b = msub.add_parser("build", help="build a persistence model from a complex file")
    b.add_argument("complex", type=_existing)
    b.add_argument("--truncation", type=_truncation, default=8)
    b.add_argument("--free-only", action="store_true", help="skip minimalization")
    b.add_argument("--out", type=Path)
    b.set_defaults(func=cmd_model_build)

    bc = sub.add_parser("barcode", help="pi or h barcode of a model file")
    bc.add_argument("model", type=_existing)
    bc.add_argument("mode", choices=("pi", "h"))
    bc.add_argument("--format", choices=("csv", "json"), default="csv")
    bc.add_argument("--out", type=Path)
    bc.set_defaults(func=cmd_barcode)

    d = sub.add_parser("distance", help="interleaving distance of two barcode files")
    d.add_argument("a", type=_existing)
    d.add_argument("b", type=_existing)
    d.add_argument("--out", type=Path)
    d.set_defaults(func=cmd_distance)

    s = sub.add_parser("stability", help="stability report for two complex files")
    s.add_argument("x", type=_existing)
    s.add_argument("y", type=_existing)
    s.add_argument("--truncation", type=_truncation, default=8)
    s.add_argument("--shift", type=_rational, help="y is x shifted by this amount")
    s.add_argument("--certificate-delta", type=_rational,
                   help="check the inclusion interleaving at this delta")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_stability)

    t = sub.add_parser("selftest", help="run the golden corpus and invariant checks")
    t.add_argument("--truncation", type=_truncation, default=8)
    t.add_argument("--corpus", type=Path, help="corpus directory (default: bundled, or "
                                               "$QUILLEN_MODELS_CORPUS)")
    t.add_argument("--out", type=Path, help="directory for artifacts")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (InvariantFailure, NotADifferential, NotAChainComplex, NotAChainMap,
            CoalgebraError, SignConventionError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (SchemaError, ModelError, LieAlgebraError, PersistenceError,
            LinearAlgebraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
