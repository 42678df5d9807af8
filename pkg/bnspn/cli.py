"""
Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input or format error.
Machine output (JSON, CSV, DOT) goes to files or stdout; diagnostics go to stderr.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .compiler.pipeline import bn2spn
from .config.env_validator import Settings, get_settings
from .decompiler.pipeline import spn2bn
from .decompiler.regions import RegionMode
from .export.dot import bn_to_dot, circuit_to_dot
from .graph.dag import Ordering, default_elimination_order, validate_ordering
from .models.bayesnet import BayesNet, default_names, family_member, family_size, random_cpts
from .models.circuit import Circuit
from .models.serialization import bn_to_dict, circuit_to_dict, load_bn, load_circuit, load_model, save_bn
from .utils.errors import BnSpnError, GraphError, error_handler, handle_error
from .verify.experiments import OrderingMode, run_table_experiment
from .verify.lemma import verify_lemma
from .verify.roundtrip import MarginalizationPolicy, resolve_marginalized, roundtrip_report


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(data, out: Optional[str]) -> None:
    _emit(json.dumps(data, indent=2) + "\n", out)


def _parse_names(raw: str, bn: BayesNet) -> List[int]:
    """Comma-separated variable names or indices"""
    nodes = []
    for token in (t.strip() for t in raw.split(",") if t.strip()):
        nodes.append(int(token) if token.isdigit() else bn.index_of(token))
    return nodes


REVERSE_TOPO = "reverse-topo"


def _sigma(args: argparse.Namespace, bn: BayesNet) -> Ordering:
    if args.order and args.order != REVERSE_TOPO:
        return validate_ordering(_parse_names(args.order, bn), len(bn.variables))
    order = default_elimination_order(bn.dag)
    if order is None:
        raise GraphError("network has no variables")
    return order


def _policy(args: argparse.Namespace, bn: BayesNet):
    """--marginalize: internal, none, or a comma-separated variable list"""
    choice = args.marginalize or MarginalizationPolicy.INTERNAL.value
    if choice in (MarginalizationPolicy.INTERNAL.value, MarginalizationPolicy.NONE.value):
        return MarginalizationPolicy(choice), None
    return MarginalizationPolicy.EXPLICIT, _parse_names(choice, bn)


def _region_mode(args: argparse.Namespace, settings: Settings) -> RegionMode:
    return RegionMode(args.region_mode or settings.region_mode)


def cmd_compile(args: argparse.Namespace, settings: Settings) -> int:
    bn = load_bn(args.bn)
    policy, explicit = _policy(args, bn)
    marg = resolve_marginalized(bn, policy, explicit)
    spn = bn2spn(bn, _sigma(args, bn), marg, settings.fixpoint_cap)
    _emit_json(circuit_to_dict(spn), args.out)
    if args.dot:
        Path(args.dot).write_text(circuit_to_dot(spn))
    return 0


def cmd_decompile(args: argparse.Namespace, settings: Settings) -> int:
    spn = load_circuit(args.spn)
    decompiled = spn2bn(spn, _region_mode(args, settings))
    _emit_json(bn_to_dict(decompiled.bn), args.out)
    if args.dot:
        Path(args.dot).write_text(bn_to_dot(decompiled.bn))
    return 0


def cmd_roundtrip(args: argparse.Namespace, settings: Settings) -> int:
    bn = load_bn(args.bn)
    policy, explicit = _policy(args, bn)
    report = roundtrip_report(bn, _sigma(args, bn), policy, explicit, _region_mode(args, settings))
    _emit_json(report.to_dict(), args.out)
    return 0


def cmd_verify_table(args: argparse.Namespace, settings: Settings) -> int:
    error_handler.reset()
    summary = run_table_experiment(
        args.n,
        mode=OrderingMode(args.orderings),
        policy=MarginalizationPolicy(args.marginalize),
        jobs=args.jobs or settings.jobs,
        sample=args.sample,
        seed=settings.seed if args.seed is None else args.seed,
        cardinality=args.cardinality or settings.cardinality,
        check_idempotence=args.idempotence,
        check_minimality=args.minimality,
        region_mode=_region_mode(args, settings),
    )
    if args.report:
        summary.write_report(args.report)
    print(summary.headline())
    errors = error_handler.get_error_summary()
    if errors["total_errors"]:
        print(f"{errors['total_errors']} trials crashed: {json.dumps(errors['error_types'])}", file=sys.stderr)
    if not summary.passed:
        print(f"{summary.must_pass_failures} of {summary.must_pass_count} must-pass trials failed", file=sys.stderr)
        return 1
    return 0


def cmd_verify_lemma(args: argparse.Namespace, settings: Settings) -> int:
    mode = _region_mode(args, settings)
    if args.spn:
        spn = load_circuit(args.spn)
    else:
        bn = load_bn(args.bn)
        policy, explicit = _policy(args, bn)
        spn = bn2spn(bn, _sigma(args, bn), resolve_marginalized(bn, policy, explicit), settings.fixpoint_cap)
    report = verify_lemma(spn, mode=mode, cap=settings.joint_cap, tol=settings.tolerance)
    _emit_json(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_enumerate(args: argparse.Namespace, settings: Settings) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = settings.seed if args.seed is None else args.seed
    cardinality = args.cardinality or settings.cardinality
    total = family_size(args.n)
    width = len(str(total - 1))
    for index in range(total):
        dag = family_member(args.n, index)
        bn = random_cpts(dag, [cardinality] * args.n, seed + index, default_names(args.n))
        save_bn(bn, out_dir / f"bn_{index:0{width}d}.json")
    print(f"{total} networks written to {out_dir}")
    return 0


def export_dot(model_path: str, out: Optional[str] = None) -> str:
    """DOT text for a BN or SPN JSON file, written to out when given"""
    model = load_model(model_path)
    text = circuit_to_dot(model) if isinstance(model, Circuit) else bn_to_dot(model)
    if out:
        Path(out).write_text(text)
    return text


def cmd_export_dot(args: argparse.Namespace, settings: Settings) -> int:
    text = export_dot(args.model, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--order", "--sigma", dest="order",
                        help="Elimination order: comma-separated names or indices, or reverse-topo "
                             "(default: the smallest topological order, reversed)")
    parser.add_argument("--marginalize", "--marg", dest="marginalize",
                        help="internal (default), none, or comma-separated variables to sum out")


def _add_region_mode(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--regions", "--region-mode", dest="region_mode", choices=[m.value for m in RegionMode],
                        help="How sums are grouped into latent variables (default: BNSPN_REGION_MODE)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnspn", description="Compile Bayesian networks to SPNs and back")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("compile", help="Compile a BN JSON file into an SPN JSON file")
    p.add_argument("--bn", required=True)
    _add_model_options(p)
    p.add_argument("--out")
    p.add_argument("--dot", help="Also write the SPN as DOT to this file")
    p.set_defaults(handler=cmd_compile)

    p = verbs.add_parser("decompile", help="Decompile an SPN JSON file into a BN JSON file")
    p.add_argument("--spn", required=True)
    _add_region_mode(p)
    p.add_argument("--out")
    p.add_argument("--dot", help="Also write the decompiled BN as DOT to this file")
    p.set_defaults(handler=cmd_decompile)

    p = verbs.add_parser("roundtrip", help="Compile then decompile, reporting edges by original variable")
    p.add_argument("--bn", required=True)
    _add_model_options(p)
    _add_region_mode(p)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_roundtrip)

    p = verbs.add_parser("verify", help="Verification harness")
    checks = p.add_subparsers(dest="check", required=True)

    t = checks.add_parser("table", help="Sweep the enumerated family of size n")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--orderings", choices=[m.value for m in OrderingMode], default=OrderingMode.NODE1_LAST.value)
    t.add_argument("--marginalize", "--policy", dest="marginalize",
                   choices=[MarginalizationPolicy.INTERNAL.value, MarginalizationPolicy.NONE.value],
                   default=MarginalizationPolicy.INTERNAL.value)
    t.add_argument("--jobs", type=int)
    t.add_argument("--sample", type=int, help="Draw this many trials uniformly without replacement")
    t.add_argument("--seed", type=int, help="Seed for CPTs and sampling (default: BNSPN_SEED)")
    t.add_argument("--cardinality", type=int)
    t.add_argument("--idempotence", action="store_true", help="Also check that each closure maps to itself")
    t.add_argument("--minimality", action="store_true",
                   help="Also record whether each decompiled DAG is a minimal I-map (slow for n >= 5)")
    _add_region_mode(t)
    t.add_argument("--report", help="CSV file receiving one row per trial")
    t.set_defaults(handler=cmd_verify_table)

    lm = checks.add_parser("lemma", help="Check P(Z|Z_A) = P(Z|Z_C) on a compiled network")
    source = lm.add_mutually_exclusive_group(required=True)
    source.add_argument("--bn")
    source.add_argument("--spn")
    _add_model_options(lm)
    _add_region_mode(lm)
    lm.add_argument("--out")
    lm.set_defaults(handler=cmd_verify_lemma)

    p = verbs.add_parser("enumerate", help="Write every family member of size n as BN JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--cardinality", type=int)
    p.set_defaults(handler=cmd_enumerate)

    p = verbs.add_parser("export-dot", help="Render a BN or SPN JSON file as DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_export_dot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
        return args.handler(args, settings)
    except (FileNotFoundError, BnSpnError) as e:
        record = handle_error(e, {"verb": args.verb})
        print(f"error: {record['error_type']}: {record['message']}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
