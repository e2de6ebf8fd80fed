"""Batch front end: load group files, run analyses, emit reports.

Exit codes: 0 clean, 2 group-file parse or content error, 10 obstruction
found, 64 usage error.  Reports are deterministic for identical inputs
and seeds; JSON output mirrors the in-memory report objects.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from .classifier import RepEntry, admissible_semisimple, verify_eigenvalue_one_generic
from .corpus import case23_fixture, margulis_pair, translation_lattice
from .errors import GroupFileError, MargulisError, NoSamplerError
from .groupio import GroupFile, group_from_parts, parse_group_file, serialize_group
from .obstruction import ObstructionReport, ScanConfig, properness_scan
from .signform import CaseTwoStructure, alpha_case23, margulis_alpha
from .spectral import is_hyperbolic, spectral_stats, three_splitting
from .words import iter_words

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_OBSTRUCTION = 10
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for parse
    # errors here, so route usage problems through an exception instead
    def error(self, message):
        raise UsageError(message)


def _num(x) -> str:
    return repr(float(x))


def _vector(v) -> str:
    return "[" + ", ".join(_num(x) for x in v) + "]"


def _alpha_or_reason(amap, structure) -> tuple[Optional[float], Optional[str]]:
    if structure is None:
        return None, "no form or splitting in the file"
    try:
        if isinstance(structure, CaseTwoStructure):
            return alpha_case23(amap, structure).alpha, None
        return margulis_alpha(amap, structure).alpha, None
    except MargulisError as exc:
        return None, str(exc)


def _generator_record(label: str, amap, structure, tol: float) -> dict:
    record: dict = {"label": label}
    moduli = sorted(float(x) for x in np.abs(np.linalg.eigvals(amap.linear)))
    record["moduli"] = moduli
    try:
        split = three_splitting(amap.linear, tol)
        record["splitting_dims"] = [split.aplus.dim, split.azero.dim,
                                    split.aminus.dim]
    except MargulisError as exc:
        record["splitting_dims"] = None
        record["splitting_error"] = str(exc)
    try:
        stats = spectral_stats(amap.linear, tol)
        record["s"] = stats.s
        record["lambda"] = stats.lam
    except MargulisError:
        record["s"] = None
        record["lambda"] = None
    record["hyperbolic"] = bool(is_hyperbolic(amap.linear, tol))
    alpha, reason = _alpha_or_reason(amap, structure)
    record["alpha"] = alpha
    if reason is not None:
        record["alpha_unavailable"] = reason
    record["translation"] = [float(x) for x in amap.translation]
    return record


def _word_ball_summary(group: GroupFile, max_len: int, tol: float) -> dict:
    gens = group.generators
    total = 0
    hyperbolic = 0
    positive = 0
    negative = 0
    samples = []
    for word, amap in iter_words(gens, max_len):
        total += 1
        if not is_hyperbolic(amap.linear, tol):
            continue
        hyperbolic += 1
        alpha, _ = _alpha_or_reason(amap, group.structure)
        if alpha is not None:
            if alpha > 0:
                positive += 1
            elif alpha < 0:
                negative += 1
        if len(samples) < 10:
            samples.append({"word": gens.word_str(word), "alpha": alpha})
    return {
        "max_len": max_len,
        "words": total,
        "hyperbolic": hyperbolic,
        "alpha_positive": positive,
        "alpha_negative": negative,
        "first_hyperbolic": samples,
    }


def _structure_description(group: GroupFile) -> str:
    if group.structure is None:
        return "none"
    if isinstance(group.structure, CaseTwoStructure):
        return "splitting R^6 = V1 + V2 with signature (2,1) form on V1"
    p, q = group.structure.signature
    return f"quadratic form of signature ({p},{q})"


def cmd_analyze(args) -> int:
    group = parse_group_file(args.file)
    payload = {
        "dimension": group.dimension,
        "structure": _structure_description(group),
        "generators": [
            _generator_record(label, amap, group.structure, args.tol)
            for label, amap in zip(group.generators.labels,
                                   group.generators.maps)
        ],
        "word_ball": _word_ball_summary(group, args.max_len, args.tol),
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"group: dimension {group.dimension}, "
          f"{len(group.generators)} generators")
    print(f"structure: {payload['structure']}")
    for rec in payload["generators"]:
        print(f"generator {rec['label']}:")
        print(f"  moduli: {', '.join(_num(x) for x in rec['moduli'])}")
        if rec["splitting_dims"] is not None:
            a_plus, a_zero, a_minus = rec["splitting_dims"]
            print(f"  splitting dims: A+ {a_plus}, A0 {a_zero}, A- {a_minus}")
        else:
            print(f"  splitting: unavailable ({rec['splitting_error']})")
        if rec["s"] is not None:
            print(f"  hyperbolic: {'yes' if rec['hyperbolic'] else 'no'}"
                  f" (s = {_num(rec['s'])})")
        else:
            print(f"  hyperbolic: {'yes' if rec['hyperbolic'] else 'no'}")
        if rec["alpha"] is not None:
            print(f"  alpha: {_num(rec['alpha'])}")
        else:
            print(f"  alpha: unavailable ({rec['alpha_unavailable']})")
    ball = payload["word_ball"]
    print(f"word ball (length <= {ball['max_len']}): {ball['words']} words, "
          f"{ball['hyperbolic']} hyperbolic, "
          f"signs: {ball['alpha_positive']} positive, "
          f"{ball['alpha_negative']} negative")
    return EXIT_OK


def _render_report_text(report: ObstructionReport) -> str:
    lines = [f"verdict: {report.verdict}"]
    for key in sorted(report.witnesses):
        lines.append(f"witness {key}: {json.dumps(report.witnesses[key], sort_keys=True)}")
    lines.append(f"margins: {json.dumps(report.margins, sort_keys=True)}")
    lines.append(f"budget: {json.dumps(report.budget, sort_keys=True)}")
    lines.append(f"note: {report.note}")
    return "\n".join(lines)


def cmd_scan(args) -> int:
    group = parse_group_file(args.file)
    config = ScanConfig(
        max_len=args.max_len,
        max_exp=args.max_exp,
        radius=args.radius,
        margin=args.margin,
        tol=args.tol,
        seed=args.seed,
        structure=group.structure,
    )
    report = properness_scan(group.generators, config)
    if args.format == "json":
        print(report.to_json(indent=2))
    else:
        print(_render_report_text(report))
    if report.verdict == "no-obstruction-within-budget":
        return EXIT_OK
    return EXIT_OBSTRUCTION


def _entry_record(entry: RepEntry, samples: int, seed: int) -> dict:
    record = {
        "name": entry.name,
        "family": entry.family,
        "v1_dim": entry.v1_dim,
        "real_rank": entry.real_rank,
        "eigenvalue_one_generic": entry.eigenvalue_one_generic,
    }
    try:
        observed = verify_eigenvalue_one_generic(entry, samples, seed)
        record["verified"] = bool(observed == entry.eigenvalue_one_generic)
    except NoSamplerError as exc:
        record["verified"] = None
        record["verification_unavailable"] = str(exc)
    return record


def cmd_classify(args) -> int:
    if not 2 <= args.n <= 6:
        raise UsageError(
            f"ambient dimension {args.n} is out of range: the admissibility "
            "lists cover 2 <= n <= 6, and higher dimensions remain open "
            "territory for this toolkit"
        )
    case1, case2 = admissible_semisimple(args.n)
    payload = {
        "n": args.n,
        "case1": [_entry_record(e, args.samples, args.seed) for e in case1],
        "case2": [_entry_record(e, args.samples, args.seed) for e in case2],
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"ambient dimension {args.n}")
    for key, title in (("case1", "case 1 (no eigenvalue 1 on V1)"),
                       ("case2", "case 2 (eigenvalue 1 on V1)")):
        print(f"{title}:")
        if not payload[key]:
            print("  (none)")
        for rec in payload[key]:
            status = {True: "agrees", False: "DISAGREES", None: "no sampler"}
            v1 = "per member" if rec["v1_dim"] is None else rec["v1_dim"]
            print(f"  {rec['name']}: V1 dim {v1}, "
                  f"real rank {rec['real_rank']}, "
                  f"eigenvalue-1 generic {rec['eigenvalue_one_generic']}, "
                  f"verification {status[rec['verified']]}")
    return EXIT_OK


def cmd_corpus(args) -> int:
    if args.name == "lattice":
        group = group_from_parts(translation_lattice(args.n))
    elif args.name == "margulis":
        gens = margulis_pair(boost_strength=args.boost, angle=args.angle,
                             translation_scale=args.scale,
                             sign_flip=args.flip)
        group = group_from_parts(gens, form=np.diag([1.0, 1.0, -1.0]))
    else:  # case23
        gens, structure = case23_fixture(boost_strength=args.boost,
                                         angle=args.angle,
                                         translation_scale=args.scale)
        group = group_from_parts(
            gens,
            form=np.diag([1.0, 1.0, -1.0]),
            splitting=(structure.v1.basis, structure.v2.basis),
        )
    text = serialize_group(group)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    return EXIT_OK


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw}")
    return value


def _positive_float(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="margulis",
                     description="spectral and sign analysis of affine groups")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def common(p, max_len_default):
        p.add_argument("--max-len", type=_positive_int, default=max_len_default,
                       help="word length cap")
        p.add_argument("--tol", type=_positive_float, default=1e-8,
                       help="modulus classification tolerance")
        p.add_argument("--format", choices=("text", "json"), default="text")

    analyze = sub.add_parser("analyze", help="per-generator spectral report")
    analyze.add_argument("file", help="group file (JSON)")
    common(analyze, 3)
    analyze.set_defaults(func=cmd_analyze)

    scan = sub.add_parser("scan", help="properness obstruction scan")
    scan.add_argument("file", help="group file (JSON)")
    common(scan, 6)
    scan.add_argument("--max-exp", type=_positive_int, default=12,
                      help="ball witness exponent cap")
    scan.add_argument("--radius", type=_positive_float, default=1.0,
                      help="ball radius")
    scan.add_argument("--seed", type=int, default=0, help="recorded seed")
    scan.add_argument("--margin", type=_positive_float, default=1e-6,
                      help="sign magnitude floor")
    scan.set_defaults(func=cmd_scan)

    classify = sub.add_parser("classify",
                              help="admissible semisimple parts in dimension n")
    classify.add_argument("n", type=int)
    classify.add_argument("--samples", type=_positive_int, default=200)
    classify.add_argument("--seed", type=int, default=0)
    classify.add_argument("--format", choices=("text", "json"), default="text")
    classify.set_defaults(func=cmd_classify)

    corpus = sub.add_parser("corpus", help="write a fixture group file")
    corpus.add_argument("name", choices=("lattice", "margulis", "case23"))
    corpus.add_argument("--n", type=_positive_int, default=2,
                        help="lattice rank")
    corpus.add_argument("--boost", type=_positive_float, default=4.0)
    corpus.add_argument("--angle", type=float, default=math.pi / 2)
    corpus.add_argument("--scale", type=_positive_float, default=2.0)
    corpus.add_argument("--flip", action="store_true",
                        help="reverse the second translation")
    corpus.add_argument("--out", default="-", help="output path, - for stdout")
    corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GroupFileError as exc:
        print(f"group file error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MargulisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
