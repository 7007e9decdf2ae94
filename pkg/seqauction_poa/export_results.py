import csv
import json
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

from seqauction_poa.auction import AuctionInstance, all_nodes
from seqauction_poa.config import save_json
from seqauction_poa.equilibrium import EquilibriumSolution
from seqauction_poa.rational_utils import format_rational, to_decimal


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)


def write_json(data: Any, stream: TextIO) -> None:
    """Writes one JSON document with a trailing newline; key order is preserved."""
    json.dump(data, stream, indent=2)
    stream.write("\n")


def write_json_lines(records: Iterable[Dict[str, Any]], stream: TextIO) -> None:
    for record in records:
        stream.write(json.dumps(record))
        stream.write("\n")


def write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str], stream: TextIO) -> None:
    """Writes rows as CSV; rationals become exact strings and None becomes an empty cell."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])


def write_pretty(rows: Sequence[Dict[str, Any]], columns: Sequence[str], stream: TextIO) -> None:
    """Aligned text table; rationals are shown exactly with an approximate decimal."""

    def show(value: Any) -> str:
        if isinstance(value, Fraction) and value.denominator != 1:
            return f"{format_rational(value)} (~{to_decimal(value, 6)})"
        return _cell(value)

    table = [list(columns)] + [[show(row.get(column)) for column in columns] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    for line in table:
        stream.write("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
        stream.write("\n")


SOLUTION_COLUMNS = ["node", "u1", "u2", "b1", "b2", "p", "outcome"]


def solution_rows(sol: EquilibriumSolution) -> List[Dict[str, Any]]:
    """One row per node, root level last, for csv/pretty output."""
    rows = []
    for node in all_nodes(sol.instance.items):
        record = sol[node]
        rows.append(
            {
                "node": f"({node.key()})",
                "u1": record.u1,
                "u2": record.u2,
                "b1": record.b1,
                "b2": record.b2,
                "p": record.price,
                "outcome": record.outcome.value if record.outcome else "",
            }
        )
    return rows


class ResultSink:
    """
    Append-only collector for batch runs. Failing instances are written to a quarantine
    directory so that they can be replayed with `verify --input`.

    Attributes:
        quarantine_dir (str): Where failing instances go.
        records (List[Dict[str, Any]]): One summary per processed instance, in arrival order.
        quarantined (List[str]): Paths of the instance files written.
    """

    def __init__(self, quarantine_dir: str):
        self.quarantine_dir = quarantine_dir
        self.records: List[Dict[str, Any]] = []
        self.quarantined: List[str] = []

    def append(self, record: Dict[str, Any], instance: Optional[AuctionInstance] = None) -> None:
        self.records.append(record)
        if not record.get("passed", True) and instance is not None:
            name = f"{record['family']}-{record['seed']}-{record['index']}.json"
            path = os.path.join(self.quarantine_dir, name)
            save_json(path, instance.to_dict())
            self.quarantined.append(path)

    @property
    def failures(self) -> int:
        return sum(1 for record in self.records if not record.get("passed", True))

    def summary(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Aggregate counts per check name plus the run parameters."""
        per_check: Dict[str, Dict[str, int]] = {}
        tie_nodes = 0
        for record in self.records:
            tie_nodes += record.get("tie_nodes", 0)
            for name, passed in record["checks"].items():
                counts = per_check.setdefault(name, {"passed": 0, "failed": 0})
                counts["passed" if passed else "failed"] += 1
        return {
            **params,
            "instances": len(self.records),
            "failed_instances": self.failures,
            "tie_nodes": tie_nodes,
            "checks": per_check,
            "quarantined": list(self.quarantined),
        }
