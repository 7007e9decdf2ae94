"""Domain types of the two-buyer sequential auction and its welfare arithmetic."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterator, List, NamedTuple, Sequence, Tuple

from seqauction_poa.config import load_json, save_json
from seqauction_poa.rational_utils import RationalLike, format_rational, parse_rational

BUYERS = (1, 2)


def other(buyer: int) -> int:
    """Returns the opponent of a buyer (1 <-> 2)."""
    return 3 - buyer


class Node(NamedTuple):
    """A history of the auction: buyer 1 has won x1 items and buyer 2 has won x2."""

    x1: int
    x2: int

    def won(self, buyer: int) -> int:
        return self.x1 if buyer == 1 else self.x2

    def child(self, buyer: int) -> "Node":
        """The successor reached when `buyer` wins the current item."""
        return Node(self.x1 + 1, self.x2) if buyer == 1 else Node(self.x1, self.x2 + 1)

    def remaining(self, items: int) -> int:
        return items - self.x1 - self.x2

    def is_terminal(self, items: int) -> bool:
        return self.x1 + self.x2 == items

    def key(self) -> str:
        return f"{self.x1},{self.x2}"


class Allocation(NamedTuple):
    """A final allocation: buyer 1 wins k items, buyer 2 wins the rest."""

    k: int

    def node(self, items: int) -> Node:
        return Node(self.k, items - self.k)


ROOT = Node(0, 0)


@dataclass(frozen=True)
class IncrementalValuation:
    """
    A buyer's incremental values v(1), ..., v(T) for a 1st, ..., T-th item.

    Attributes:
        values (Tuple[Fraction, ...]): values[j] is v(j+1).
    """

    values: Tuple[Fraction, ...]
    _prefix: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(parse_rational(v) for v in self.values)
        object.__setattr__(self, "values", values)
        prefix = [Fraction(0)]
        for v in values:
            prefix.append(prefix[-1] + v)
        object.__setattr__(self, "_prefix", tuple(prefix))

    def __len__(self) -> int:
        return len(self.values)

    def v(self, j: int) -> Fraction:
        """The incremental value of a j-th item (1-based)."""
        if not 1 <= j <= len(self.values):
            raise ValueError(f"Item index {j} outside 1..{len(self.values)}")
        return self.values[j - 1]

    def cumulative(self, k: int) -> Fraction:
        """V(k) = v(1) + ... + v(k), with V(0) = 0."""
        if not 0 <= k <= len(self.values):
            raise ValueError(f"Item count {k} outside 0..{len(self.values)}")
        return self._prefix[k]

    def prefix_sums(self) -> Tuple[Fraction, ...]:
        return self._prefix

    @property
    def is_concave(self) -> bool:
        """True if the incremental values are non-increasing."""
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    def scaled(self, factor: Fraction) -> "IncrementalValuation":
        return IncrementalValuation(tuple(v * factor for v in self.values))


@dataclass(frozen=True)
class AuctionInstance:
    """
    A sequential auction of T identical items between two buyers.

    Attributes:
        items (int): Number of items T.
        valuation_1 (IncrementalValuation): Buyer 1's incremental values.
        valuation_2 (IncrementalValuation): Buyer 2's incremental values.
    """

    items: int
    valuation_1: IncrementalValuation
    valuation_2: IncrementalValuation

    @classmethod
    def from_values(
        cls, v1: Sequence[RationalLike], v2: Sequence[RationalLike]
    ) -> "AuctionInstance":
        if len(v1) != len(v2):
            raise ValueError(f"Valuations differ in length: {len(v1)} vs {len(v2)}")
        return cls(len(v1), IncrementalValuation(tuple(v1)), IncrementalValuation(tuple(v2)))

    def valuation(self, buyer: int) -> IncrementalValuation:
        return self.valuation_1 if buyer == 1 else self.valuation_2

    def v(self, buyer: int, j: int) -> Fraction:
        return self.valuation(buyer).v(j)

    def contains(self, node: Node) -> bool:
        return node.x1 >= 0 and node.x2 >= 0 and node.x1 + node.x2 <= self.items

    def scaled(self, factor: RationalLike) -> "AuctionInstance":
        """Multiplies every incremental value by a positive rational."""
        factor = parse_rational(factor)
        if factor <= 0:
            raise ValueError(f"Scale factor must be positive, got {factor}")
        return AuctionInstance(
            self.items, self.valuation_1.scaled(factor), self.valuation_2.scaled(factor)
        )

    def normalized(self) -> "AuctionInstance":
        """Rescales so that the optimal welfare from the root is 1 (unchanged if it is 0)."""
        best, _ = opt_welfare(self, ROOT)
        return self if best == 0 else self.scaled(1 / best)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": self.items,
            "v1": [format_rational(v) for v in self.valuation_1.values],
            "v2": [format_rational(v) for v in self.valuation_2.values],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AuctionInstance":
        """
        Builds an instance from the JSON contract {"T": int, "v1": [rat...], "v2": [rat...]}.

        Length mismatches are kept so that `validate_instance` can report them.

        Raises:
            ValueError: If a key is missing or a value is not a rational.
        """
        if not isinstance(data, dict):
            raise ValueError(f"Instance must be a JSON object, got {type(data).__name__}")
        missing = [key for key in ("T", "v1", "v2") if key not in data]
        if missing:
            raise ValueError(f"Instance is missing keys: {', '.join(missing)}")
        items = data["T"]
        if isinstance(items, bool) or not isinstance(items, int):
            raise ValueError(f"T must be an integer, got {items!r}")
        if not isinstance(data["v1"], list) or not isinstance(data["v2"], list):
            raise ValueError("v1 and v2 must be lists of rationals")
        return cls(
            items,
            IncrementalValuation(tuple(data["v1"])),
            IncrementalValuation(tuple(data["v2"])),
        )


@dataclass(frozen=True)
class ValidationReport:
    """Result of `validate_instance`: violations found plus per-buyer concavity flags."""

    violations: Tuple[str, ...]
    concave: Tuple[bool, bool]

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "violations": list(self.violations),
            "concave": {"buyer1": self.concave[0], "buyer2": self.concave[1]},
        }


def validate_instance(inst: AuctionInstance) -> ValidationReport:
    """
    Checks an instance against the model: T >= 1, both valuations of length T, free disposal.

    Never raises on a bad instance; the caller decides what to do with the violations.
    """
    violations: List[str] = []
    if inst.items < 1:
        violations.append(f"T must be a positive integer, got {inst.items}")
    for buyer in BUYERS:
        valuation = inst.valuation(buyer)
        if len(valuation) != inst.items:
            violations.append(
                f"valuation of buyer {buyer} has length {len(valuation)}, expected {inst.items}"
            )
        for j, value in enumerate(valuation.values, start=1):
            if value < 0:
                violations.append(
                    f"negative incremental value v{buyer}({j}) = {format_rational(value)}"
                )
    return ValidationReport(
        tuple(violations), (inst.valuation_1.is_concave, inst.valuation_2.is_concave)
    )


def load_instance(path: str) -> AuctionInstance:
    """Reads an instance JSON file."""
    return AuctionInstance.from_dict(load_json(path))


def dump_instance(inst: AuctionInstance, path: str) -> None:
    save_json(path, inst.to_dict())


def all_nodes(items: int) -> Iterator[Node]:
    """Every lattice node, level by level from the terminal level x1 + x2 = T down to the root."""
    for level in range(items, -1, -1):
        for x1 in range(level, -1, -1):
            yield Node(x1, level - x1)


def _check_node(inst: AuctionInstance, node: Node) -> None:
    if not inst.contains(node):
        raise ValueError(
            f"Node ({node.key()}) is outside the lattice of a {inst.items}-item auction"
        )


def social_welfare(inst: AuctionInstance, node: Node, k: int) -> Fraction:
    """
    Welfare from `node` of the allocation where buyer 1 wins exactly k more items.

    sw(k|x) = V1(x1 + k) - V1(x1) + V2(T - x1 - k) - V2(x2)

    Raises:
        ValueError: If the node is outside the lattice or k is not in [0, t(x)].
    """
    _check_node(inst, node)
    remaining = node.remaining(inst.items)
    if not 0 <= k <= remaining:
        raise ValueError(f"k = {k} outside 0..{remaining} at node ({node.key()})")
    v1, v2 = inst.valuation_1, inst.valuation_2
    return (
        v1.cumulative(node.x1 + k)
        - v1.cumulative(node.x1)
        + v2.cumulative(inst.items - node.x1 - k)
        - v2.cumulative(node.x2)
    )


def opt_welfare(inst: AuctionInstance, node: Node) -> Tuple[Fraction, FrozenSet[int]]:
    """
    Optimal welfare from `node` and the full set of maximizing k.

    Returns:
        Tuple[Fraction, FrozenSet[int]]: (opt(x), argmax of sw(.|x)).
    """
    _check_node(inst, node)
    welfare = [social_welfare(inst, node, k) for k in range(node.remaining(inst.items) + 1)]
    best = max(welfare)
    return best, frozenset(k for k, w in enumerate(welfare) if w == best)


def efficiency(inst: AuctionInstance, node: Node, endpoint: Allocation) -> Fraction:
    """
    Efficiency of reaching `endpoint` from `node`: sw / opt, or 1 when opt(node) = 0.

    Raises:
        ValueError: If the endpoint is not reachable from the node.
    """
    _check_node(inst, node)
    if not (endpoint.k >= node.x1 and inst.items - endpoint.k >= node.x2):
        raise ValueError(
            f"Endpoint ({endpoint.k},{inst.items - endpoint.k}) "
            f"is not reachable from ({node.key()})"
        )
    best, _ = opt_welfare(inst, node)
    if best == 0:
        return Fraction(1)
    return social_welfare(inst, node, endpoint.k - node.x1) / best
