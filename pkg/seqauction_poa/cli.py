import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from seqauction_poa.auction import ROOT, AuctionInstance, load_instance, validate_instance
from seqauction_poa.checks import CheckReport, Witness, run_all_checks
from seqauction_poa.config import (
    DEFAULT_FUZZ_COUNT,
    DEFAULT_MAX_ITEMS,
    DEFAULT_SEED,
    OUTPUT_DIR,
    QUARANTINE_DIR,
    save_json,
)
from seqauction_poa.equilibrium import (
    Outcome,
    PathReport,
    TieInvarianceError,
    TiePolicy,
    extract_path,
    min_equilibrium_efficiency,
    reachable_equilibrium_endpoints,
    revenue,
    solution_to_dict,
    solve,
    witness_path,
)
from seqauction_poa.export_results import (
    SOLUTION_COLUMNS,
    ResultSink,
    solution_rows,
    write_csv,
    write_json,
    write_json_lines,
    write_pretty,
)
from seqauction_poa.instances import FAMILIES, InstanceFamily, tight_concave
from seqauction_poa.lp import (
    DualCertificate,
    concave_bound_row,
    concave_dual_certificate,
    dual_objective,
    dual_slacks,
    general_dual_certificate,
    lp_optimum,
    poa_bound_concave,
    poa_bound_concave_min,
    poa_bound_general,
    verify_dual,
)
from seqauction_poa.rational_utils import (
    format_rational,
    one_minus_inv_e_lower,
    rational_payload,
    to_decimal,
)
from seqauction_poa.simplex import LpStatus

FORMATS = ("json", "csv", "pretty")
DEFAULT_FORMATS = {
    "verify": "json",
    "generate": "json",
    "fuzz": "json",
    "certify": "csv",
    "poa-table": "csv",
}
RANDOM_FAMILIES = ("random-concave", "random-general")
PATH_COLUMNS = ["path", "endpoint", "efficiency", "revenue", "winners", "prices", "nodes"]
SLACK_COLUMNS = ["family", "index", "lhs", "rhs", "slack", "tight"]
TABLE_COLUMNS = ["T", "k", "formula", "lp_opt", "dual_obj", "tight_instance_eff", "min_over_k"]


def status(message: str) -> None:
    """Human-readable progress goes to stderr so stdout stays machine-readable."""
    print(message, file=sys.stderr)


@dataclass
class RunConfig:
    """
    Everything a subcommand needs besides its own numeric flags.

    Attributes:
        command (str): The subcommand name.
        input_path (Optional[str]): Instance JSON file, exclusive with `family`.
        family (Optional[InstanceFamily]): Generated instance, exclusive with `input_path`.
        policy (Optional[TiePolicy]): Tie policy for `paths`; None means every endpoint and policy.
        output_format (str): One of json, csv, pretty.
        seed (int): Base seed for random families.
        jobs (int): Worker processes for `fuzz` and `poa-table`.
        quiet (bool): Suppress progress bars and status lines.
    """

    command: str
    input_path: Optional[str] = None
    family: Optional[InstanceFamily] = None
    policy: Optional[TiePolicy] = None
    output_format: str = "pretty"
    seed: int = DEFAULT_SEED
    jobs: int = 1
    quiet: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        family = None
        if getattr(args, "family", None):
            family = InstanceFamily(
                args.family,
                T=getattr(args, "T", 2),
                k=getattr(args, "k", 0),
                seed=getattr(args, "seed", DEFAULT_SEED),
                scale=getattr(args, "scale", None),
            )
        policy = getattr(args, "policy", None)
        output_format = getattr(args, "format", None) or DEFAULT_FORMATS.get(args.command, "pretty")
        return cls(
            command=args.command,
            input_path=getattr(args, "input", None),
            family=family,
            policy=None if policy in (None, "all") else TiePolicy(policy),
            output_format=output_format,
            seed=getattr(args, "seed", DEFAULT_SEED),
            jobs=getattr(args, "jobs", 1),
            quiet=getattr(args, "quiet", False),
        )

    def load_instance(self) -> AuctionInstance:
        """
        Reads or builds the instance.

        Raises:
            FileNotFoundError: If the input file does not exist.
            ValueError: If the file is not an instance or the family parameters are invalid.
        """
        if self.input_path is not None:
            return load_instance(self.input_path)
        if self.family is None:
            raise ValueError("Either --input or --family is required")
        return self.family.build()


def _load_checked(config: RunConfig) -> Optional[AuctionInstance]:
    """The validated instance, or None after printing why it is invalid."""
    try:
        inst = config.load_instance()
    except ValueError as e:
        write_json({"valid": False, "violations": [str(e)]}, sys.stdout)
        status(f"Error: invalid instance: {e}")
        return None
    report = validate_instance(inst)
    if not report.valid:
        write_json(report.to_dict(), sys.stdout)
        status(f"Error: invalid instance ({len(report.violations)} violations)")
        return None
    return inst


def _emit_rows(config: RunConfig, rows: List[Dict[str, Any]], columns: Sequence[str]) -> None:
    if config.output_format == "csv":
        write_csv(rows, columns, sys.stdout)
    elif config.output_format == "pretty":
        write_pretty(rows, columns, sys.stdout)
    else:
        write_json([_jsonable(row) for row in rows], sys.stdout)


def _jsonable(row: Dict[str, Any]) -> Dict[str, Any]:
    """Rationals become {"exact", "approx"} payloads; everything else is kept."""
    return {
        key: rational_payload(value) if isinstance(value, Fraction) else value
        for key, value in row.items()
    }


def _output_path(name: str) -> str:
    """Bare file names land in the output directory; anything with a directory is kept."""
    return name if os.path.dirname(name) else os.path.join(OUTPUT_DIR, name)


def cmd_solve(config: RunConfig, args: argparse.Namespace) -> int:
    inst = _load_checked(config)
    if inst is None:
        return 1
    sol = solve(inst)
    if config.output_format == "json":
        write_json(solution_to_dict(sol), sys.stdout)
    else:
        _emit_rows(config, solution_rows(sol), SOLUTION_COLUMNS)
    return 0


def _path_row(label: str, path: PathReport, items: int) -> Dict[str, Any]:
    return {
        "path": label,
        "endpoint": f"({path.endpoint.k},{items - path.endpoint.k})",
        "efficiency": path.efficiency,
        "revenue": revenue(path),
        "winners": "".join(str(w) for w in path.winners),
        "prices": " ".join(format_rational(p) for p in path.prices_paid),
        "nodes": "->".join(f"({n.key()})" for n in path.nodes),
    }


def cmd_paths(config: RunConfig, args: argparse.Namespace) -> int:
    inst = _load_checked(config)
    if inst is None:
        return 1
    sol = solve(inst)
    endpoints = sorted(reachable_equilibrium_endpoints(sol, ROOT))
    labelled = []
    if config.policy is None:
        for endpoint in endpoints:
            labelled.append((f"endpoint:{endpoint.k}", witness_path(sol, ROOT, endpoint)))
        policies = list(TiePolicy)
    else:
        policies = [config.policy]
    labelled.extend((policy.value, extract_path(sol, ROOT, policy)) for policy in policies)
    worst = min_equilibrium_efficiency(sol)

    if config.output_format == "json":
        write_json(
            {
                "instance": inst.to_dict(),
                "endpoints": [e.k for e in endpoints],
                "min_efficiency": rational_payload(worst),
                "paths": {
                    label: {**path.to_dict(), "revenue": format_rational(revenue(path))}
                    for label, path in labelled
                },
            },
            sys.stdout,
        )
    else:
        rows = [_path_row(label, path, inst.items) for label, path in labelled]
        _emit_rows(config, rows, PATH_COLUMNS)
        if config.output_format == "pretty":
            print(
                f"\nMinimum equilibrium efficiency: {format_rational(worst)} (~{to_decimal(worst)})"
            )
    return 0


def _verify_reports(inst: AuctionInstance) -> List[CheckReport]:
    try:
        sol = solve(inst)
    except TieInvarianceError as e:
        witness = Witness("solve", Fraction(0), Fraction(0), str(e))
        return [CheckReport("tie_invariance", False, (witness,))]
    return run_all_checks(sol)


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    inst = _load_checked(config)
    if inst is None:
        return 1
    reports = _verify_reports(inst)
    if config.output_format == "json":
        write_json_lines((report.to_dict() for report in reports), sys.stdout)
    else:
        rows = [
            {
                "check": r.check_name,
                "passed": r.passed,
                "witnesses": len(r.witnesses),
                "first": r.witnesses[0].where if r.witnesses else "",
            }
            for r in reports
        ]
        _emit_rows(config, rows, ["check", "passed", "witnesses", "first"])
    failed = [r.check_name for r in reports if not r.passed]
    if failed:
        status(f"{len(failed)} of {len(reports)} checks failed: {', '.join(failed)}")
        return 1
    if not config.quiet:
        status(f"All {len(reports)} checks passed.")
    return 0


def _certificate(T: int, k: int, concave: bool) -> DualCertificate:
    return concave_dual_certificate(T, k) if concave else general_dual_certificate(T, k)


def _bound_value(T: int, k: int, concave: bool, method: str) -> Optional[Fraction]:
    """The (T, k) bound by one method; None when a certificate fails to verify."""
    if method == "formula":
        return poa_bound_concave(T, k) if concave else poa_bound_general(T)
    if method == "lp":
        result = lp_optimum(T, k, concave)
        if result.status is not LpStatus.OPTIMAL:
            raise RuntimeError(f"LP for T = {T}, k = {k} is {result.status.value}")
        return result.optimal_value
    cert = _certificate(T, k, concave)
    if not verify_dual(cert, T, k, concave).passed:
        return None
    return dual_objective(cert)


def cmd_bound(config: RunConfig, args: argparse.Namespace) -> int:
    T, concave, method = args.T, args.bound_class == "concave", args.method
    if T < 1:
        raise ValueError(f"--T must be a positive integer, got {T}")
    result: Dict[str, Any] = {"T": T, "class": args.bound_class, "method": method}
    if args.min_over_k:
        if concave and method == "formula":
            value, argmin = poa_bound_concave_min(T)
        else:
            values = []
            for k in tqdm(range(T), desc="k", disable=config.quiet or T < 10, file=sys.stderr):
                values.append(_bound_value(T, k, concave, method))
            if any(v is None for v in values):
                status("Error: a dual certificate failed to verify; run `certify` for details.")
                return 1
            value = min(values)
            argmin = values.index(value)
        result["argmin_k"] = argmin
    else:
        argmin = args.k
        result["k"] = args.k
        value = _bound_value(T, args.k, concave, method)
        if value is None:
            status("Error: the dual certificate failed to verify; run `certify` for details.")
            return 1
    result["value"] = rational_payload(value)
    if concave and args.min_over_k:
        result["above_one_minus_inv_e"] = value >= one_minus_inv_e_lower()

    if config.output_format == "json":
        write_json(result, sys.stdout)
    elif config.output_format == "csv":
        row = {**result, "k": argmin, "value": value, "approx": to_decimal(value)}
        write_csv([row], ["T", "k", "class", "method", "value", "approx"], sys.stdout)
    else:
        where = f"argmin k = {argmin}" if args.min_over_k else f"k = {argmin}"
        print(f"{args.bound_class} bound, {method}, T = {T}, {where}:")
        print(f"  {format_rational(value)}")
        print(f"  ~{to_decimal(value)}")
    return 0


def cmd_certify(config: RunConfig, args: argparse.Namespace) -> int:
    T, k, concave = args.T, args.k, args.bound_class == "concave"
    cert = _certificate(T, k, concave)
    rows = [
        {
            "family": row.family,
            "index": row.index,
            "lhs": row.lhs,
            "rhs": row.rhs,
            "slack": row.slack,
            "tight": row.tight,
        }
        for row in dual_slacks(cert, T, k, concave)
    ]
    _emit_rows(config, rows, SLACK_COLUMNS)
    report = verify_dual(cert, T, k, concave)
    if not report.passed:
        status(f"Certificate for T = {T}, k = {k} fails on {len(report.witnesses)} rows.")
        return 1
    if not config.quiet:
        status(f"Certificate feasible; dual objective {format_rational(dual_objective(cert))}.")
    return 0


def cmd_generate(config: RunConfig, args: argparse.Namespace) -> int:
    inst = config.load_instance()
    if args.output:
        path = _output_path(args.output)
        save_json(path, inst.to_dict())
        if not config.quiet:
            status(f"Wrote {path}")
    else:
        write_json(inst.to_dict(), sys.stdout)
    return 0


def fuzz_instance(task: Tuple[int, InstanceFamily]) -> Tuple[Dict[str, Any], Optional[Dict]]:
    """
    Solves and checks one generated instance. Top-level so that worker processes can pickle it.

    Returns:
        Tuple: The summary record and, on failure, the instance JSON to quarantine.
    """
    index, family = task
    inst = family.build()
    record: Dict[str, Any] = {"index": index, **family.describe()}
    try:
        sol = solve(inst)
    except TieInvarianceError as e:
        record.update(passed=False, tie_nodes=0, checks={"tie_invariance": False}, error=str(e))
        return record, inst.to_dict()
    reports = run_all_checks(sol)
    ties = [node for node in sol.decision_nodes() if sol[node].outcome is Outcome.TIE]
    record["tie_nodes"] = len(ties)
    record["checks"] = {report.check_name: report.passed for report in reports}
    record["passed"] = all(report.passed for report in reports)
    return record, None if record["passed"] else inst.to_dict()


def fuzz_tasks(
    family: str, count: int, max_items: int, seed: int, scale: Optional[str] = None
) -> List[Tuple[int, InstanceFamily]]:
    """Instance i has T = 1 + (i mod max_items) and seed = seed + i."""
    return [
        (i, InstanceFamily(family, T=1 + i % max_items, seed=seed + i, scale=scale))
        for i in range(count)
    ]


def cmd_fuzz(config: RunConfig, args: argparse.Namespace) -> int:
    if args.count < 0 or args.max_items < 1:
        raise ValueError("--count must be >= 0 and --max-items >= 1")
    tasks = fuzz_tasks(args.family, args.count, args.max_items, config.seed, args.scale)
    sink = ResultSink(args.quarantine_dir)
    if config.jobs > 1:
        results = process_map(
            fuzz_instance,
            tasks,
            max_workers=config.jobs,
            chunksize=max(1, len(tasks) // (config.jobs * 8)),
            desc="Fuzzing",
            disable=config.quiet,
        )
    else:
        results = (
            fuzz_instance(task)
            for task in tqdm(tasks, desc="Fuzzing", disable=config.quiet, file=sys.stderr)
        )
    for record, failed in results:
        sink.append(record, AuctionInstance.from_dict(failed) if failed else None)

    params = {
        "family": args.family,
        "count": args.count,
        "max_items": args.max_items,
        "seed": config.seed,
    }
    write_json(sink.summary(params), sys.stdout)
    if sink.failures:
        status(
            f"{sink.failures} of {len(sink.records)} instances failed; "
            f"quarantined in {args.quarantine_dir}"
        )
        return 1
    if not config.quiet:
        status(f"All {len(sink.records)} instances passed every check.")
    return 0


def table_row(task: Tuple[int, int, bool, bool]) -> Dict[str, Any]:
    """One (T, k) row of the concave bound table. Top-level for worker processes."""
    T, k, with_lp, with_tight = task
    tight = min_equilibrium_efficiency(solve(tight_concave(T, k))) if with_tight else None
    row = concave_bound_row(T, k, with_lp=with_lp, tight_efficiency=tight)
    row["min_over_k"] = poa_bound_concave_min(T)[0]
    return row


def cmd_poa_table(config: RunConfig, args: argparse.Namespace) -> int:
    if not 1 <= args.min_items <= args.max_items:
        raise ValueError("--min-items must be between 1 and --max-items")
    tasks = [
        (T, k, args.lp, args.tight)
        for T in range(args.min_items, args.max_items + 1)
        for k in range(T)
    ]
    if config.jobs > 1:
        rows = process_map(
            table_row,
            tasks,
            max_workers=config.jobs,
            chunksize=max(1, len(tasks) // (config.jobs * 8)),
            desc="Table",
            disable=config.quiet,
        )
    else:
        rows = [
            table_row(task)
            for task in tqdm(tasks, desc="Table", disable=config.quiet, file=sys.stderr)
        ]
    if args.output:
        path = _output_path(args.output)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            write_csv(rows, TABLE_COLUMNS, f)
        if not config.quiet:
            status(f"Wrote {len(rows)} rows to {path}")
    else:
        _emit_rows(config, rows, TABLE_COLUMNS)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "paths": cmd_paths,
    "verify": cmd_verify,
    "bound": cmd_bound,
    "certify": cmd_certify,
    "generate": cmd_generate,
    "fuzz": cmd_fuzz,
    "poa-table": cmd_poa_table,
}


def _instance_parent(required: bool) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    source = parent.add_mutually_exclusive_group(required=required)
    source.add_argument("--input", metavar="PATH", help="Instance JSON file.")
    source.add_argument(
        "--family",
        choices=sorted(FAMILIES),
        help="Generate the instance from a named family instead of reading a file.",
    )
    parent.add_argument("--T", dest="T", type=int, default=2, help="Number of items (default: 2).")
    parent.add_argument(
        "--k", type=int, default=0, help="Endpoint parameter for tight-concave (default: 0)."
    )
    parent.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"Seed for random families (default: {DEFAULT_SEED}).",
    )
    parent.add_argument("--scale", help="Positive rational scale for random families, e.g. 3/2.")
    return parent


def _format_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--format",
        choices=FORMATS,
        default=None,
        help="Output format (default depends on the subcommand).",
    )
    parent.add_argument("--quiet", action="store_true", help="No progress bars or status lines.")
    return parent


def _bound_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--T", dest="T", type=int, required=True, help="Number of items.")
    parent.add_argument("--k", type=int, default=0, help="Endpoint (k, T-k) (default: 0).")
    parent.add_argument(
        "--class",
        dest="bound_class",
        choices=("concave", "general"),
        default="concave",
        help="Valuation class (default: concave).",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqauction-poa",
        description="Equilibria and price-of-anarchy bounds for two-buyer sequential "
        "second-price auctions, in exact rational arithmetic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = _format_parent()

    sub.add_parser("solve", parents=[_instance_parent(True), fmt], help="Full node table.")

    paths = sub.add_parser(
        "paths", parents=[_instance_parent(True), fmt], help="Equilibrium endpoints and paths."
    )
    paths.add_argument(
        "--policy",
        choices=["all"] + [p.value for p in TiePolicy],
        default="all",
        help="Tie policy; 'all' shows a path per endpoint and per policy (default: all).",
    )

    sub.add_parser(
        "verify",
        parents=[_instance_parent(True), fmt],
        help="Run every structural check; exit 1 if any fails.",
    )

    bound = sub.add_parser("bound", parents=[_bound_parent(), fmt], help="Efficiency bound.")
    bound.add_argument(
        "--method",
        choices=("lp", "certificate", "formula"),
        default="formula",
        help="How to compute the bound (default: formula).",
    )
    bound.add_argument(
        "--min-over-k", action="store_true", help="Minimize over every endpoint k instead."
    )

    sub.add_parser(
        "certify", parents=[_bound_parent(), fmt], help="Per-row slack table of a dual certificate."
    )

    generate = sub.add_parser(
        "generate", parents=[_instance_parent(True)], help="Emit instance JSON."
    )
    generate.add_argument(
        "--output", metavar="PATH", help="Write to a file (bare names go to the output directory)."
    )
    generate.add_argument("--quiet", action="store_true", help="No status line after writing.")

    fuzz = sub.add_parser("fuzz", help="Check many random instances; prints a JSON summary.")
    fuzz.add_argument("--family", choices=RANDOM_FAMILIES, default="random-concave")
    fuzz.add_argument(
        "--count",
        type=int,
        default=DEFAULT_FUZZ_COUNT,
        help=f"Number of instances (default: {DEFAULT_FUZZ_COUNT}).",
    )
    fuzz.add_argument(
        "--max-items",
        type=int,
        default=DEFAULT_MAX_ITEMS,
        help=f"Instances cycle through T = 1..max-items (default: {DEFAULT_MAX_ITEMS}).",
    )
    fuzz.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Base seed.")
    fuzz.add_argument("--scale", help="Positive rational scale for the value grid.")
    fuzz.add_argument("--jobs", type=int, default=1, help="Worker processes (default: 1).")
    fuzz.add_argument(
        "--quarantine-dir",
        default=QUARANTINE_DIR,
        help=f"Where failing instances are written (default: {QUARANTINE_DIR}).",
    )
    fuzz.add_argument("--quiet", action="store_true", help="No progress bars or status lines.")

    table = sub.add_parser("poa-table", parents=[fmt], help="CSV of concave bounds over (T, k).")
    table.add_argument("--min-items", type=int, default=1, help="Smallest T (default: 1).")
    table.add_argument(
        "--max-items", type=int, default=DEFAULT_MAX_ITEMS, help="Largest T (default: 12)."
    )
    table.add_argument("--lp", action="store_true", help="Fill lp_opt with the exact LP optimum.")
    table.add_argument(
        "--tight", action="store_true", help="Fill tight_instance_eff by solving tight instances."
    )
    table.add_argument("--jobs", type=int, default=1, help="Worker processes (default: 1).")
    table.add_argument(
        "--output",
        metavar="PATH",
        help="Write CSV to a file (bare names go to the output directory).",
    )
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses `argv` and runs one subcommand.

    Returns:
        int: 0 on success, 1 on a failed check or an invalid instance, 2 on usage or I/O errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config = RunConfig.from_args(args)
    try:
        return COMMANDS[args.command](config, args)
    except OSError as e:
        status(f"Error: {e}")
        return 2
    except ValueError as e:
        status(f"Error: {e}")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
