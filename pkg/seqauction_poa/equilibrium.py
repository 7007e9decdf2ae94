"""Backward-induction solver for the subgame-perfect equilibrium of the sequential auction."""

from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from seqauction_poa.auction import (
    ROOT,
    Allocation,
    AuctionInstance,
    Node,
    all_nodes,
    efficiency,
)
from seqauction_poa.rational_utils import format_rational


class Outcome(str, Enum):
    BUYER1_WINS = "Buyer1Wins"
    BUYER2_WINS = "Buyer2Wins"
    TIE = "Tie"


class TiePolicy(str, Enum):
    """How a single path resolves ties. ALTERNATE favors buyer 1 on the 1st, 3rd, ... tie."""

    FAVOR_BUYER1 = "FavorBuyer1"
    FAVOR_BUYER2 = "FavorBuyer2"
    ALTERNATE = "Alternate"


class TieInvarianceError(RuntimeError):
    """Utilities at a tie differ depending on who wins; only an arithmetic bug can cause this."""


@dataclass(frozen=True)
class NodeRecord:
    """
    Equilibrium data at one node. Bids, price and outcome are None at terminal nodes.

    Attributes:
        u1, u2 (Fraction): Forward utilities.
        b1, b2 (Optional[Fraction]): Bids.
        price (Optional[Fraction]): min(b1, b2).
        outcome (Optional[Outcome]): Strict winner or TIE.
    """

    u1: Fraction
    u2: Fraction
    b1: Optional[Fraction] = None
    b2: Optional[Fraction] = None
    price: Optional[Fraction] = None
    outcome: Optional[Outcome] = None

    def u(self, buyer: int) -> Fraction:
        return self.u1 if buyer == 1 else self.u2

    def bid(self, buyer: int) -> Fraction:
        return self.b1 if buyer == 1 else self.b2

    @property
    def is_terminal(self) -> bool:
        return self.outcome is None

    @property
    def winners(self) -> Tuple[int, ...]:
        """Buyers whose bid is weakly maximal."""
        if self.outcome is None:
            return ()
        if self.outcome is Outcome.TIE:
            return (1, 2)
        return (1,) if self.outcome is Outcome.BUYER1_WINS else (2,)

    def wins_weakly(self, buyer: int) -> bool:
        return buyer in self.winners


@dataclass(frozen=True)
class EquilibriumSolution:
    """The solved auction: a NodeRecord for every node of the lattice."""

    instance: AuctionInstance
    records: Mapping[Node, NodeRecord]

    def __getitem__(self, node: Node) -> NodeRecord:
        return self.records[node]

    def u(self, buyer: int, node: Node) -> Fraction:
        return self.records[node].u(buyer)

    def U(self, node: Node) -> Fraction:
        """Sum of both buyers' forward utilities."""
        record = self.records[node]
        return record.u1 + record.u2

    def decision_nodes(self) -> Iterator[Node]:
        for node in all_nodes(self.instance.items):
            if not node.is_terminal(self.instance.items):
                yield node


@dataclass(frozen=True)
class PathReport:
    """
    One equilibrium path from a start node to a terminal node.

    Attributes:
        nodes (Tuple[Node, ...]): Visited nodes, start first, terminal last.
        endpoint (Allocation): The terminal allocation.
        prices_paid (Tuple[Fraction, ...]): Price at each decision node of the path.
        winners (Tuple[int, ...]): The buyer who took the item at each step.
        efficiency (Fraction): Efficiency of the endpoint relative to the start node.
    """

    nodes: Tuple[Node, ...]
    endpoint: Allocation
    prices_paid: Tuple[Fraction, ...]
    winners: Tuple[int, ...]
    efficiency: Fraction

    @property
    def start(self) -> Node:
        return self.nodes[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nodes": [node.key() for node in self.nodes],
            "endpoint": self.endpoint.k,
            "winners": list(self.winners),
            "prices": [format_rational(p) for p in self.prices_paid],
            "efficiency": format_rational(self.efficiency),
        }


def resolve_utilities(
    inst: AuctionInstance,
    records: Mapping[Node, NodeRecord],
    node: Node,
    b1: Fraction,
    b2: Fraction,
    winner: int,
) -> Tuple[Fraction, Fraction]:
    """
    Forward utilities at a decision node when `winner` takes the item at the loser's bid.

    The children of `node` must already be present in `records`.
    """
    loser_bid = b2 if winner == 1 else b1
    won = records[node.child(winner)]
    payoff = inst.v(winner, node.won(winner) + 1) - loser_bid + won.u(winner)
    if winner == 1:
        return payoff, won.u2
    return won.u1, payoff


def solve(inst: AuctionInstance) -> EquilibriumSolution:
    """
    Computes forward utilities, bids, prices and outcomes by backward induction on x1 + x2.

    Args:
        inst (AuctionInstance): A valid instance.

    Returns:
        EquilibriumSolution: Records for every node with x1 + x2 <= T.

    Raises:
        TieInvarianceError: If the two resolutions of a tie give different utilities.
    """
    items = inst.items
    records: Dict[Node, NodeRecord] = {}
    for node in all_nodes(items):
        if node.is_terminal(items):
            records[node] = NodeRecord(Fraction(0), Fraction(0))
            continue
        left, right = records[node.child(1)], records[node.child(2)]
        b1 = inst.v(1, node.x1 + 1) + left.u1 - right.u1
        b2 = inst.v(2, node.x2 + 1) + right.u2 - left.u2
        if b1 > b2:
            outcome = Outcome.BUYER1_WINS
            u1, u2 = resolve_utilities(inst, records, node, b1, b2, 1)
        elif b1 < b2:
            outcome = Outcome.BUYER2_WINS
            u1, u2 = resolve_utilities(inst, records, node, b1, b2, 2)
        else:
            outcome = Outcome.TIE
            u1, u2 = resolve_utilities(inst, records, node, b1, b2, 1)
            if (u1, u2) != resolve_utilities(inst, records, node, b1, b2, 2):
                raise TieInvarianceError(f"Tie at ({node.key()}) is not utility-invariant")
        records[node] = NodeRecord(u1, u2, b1, b2, min(b1, b2), outcome)
    return EquilibriumSolution(inst, records)


def _successors(sol: EquilibriumSolution, node: Node) -> Tuple[Tuple[int, Node], ...]:
    return tuple((buyer, node.child(buyer)) for buyer in sol[node].winners)


def reachable_equilibrium_endpoints(
    sol: EquilibriumSolution, node: Node = ROOT
) -> Set[Allocation]:
    """
    Terminal allocations reachable from `node` along some equilibrium path.

    Strict winners are followed; both children are followed at a tie.
    """
    items = sol.instance.items
    endpoints: Set[Allocation] = set()
    seen = {node}
    queue = deque([node])
    while queue:
        current = queue.popleft()
        if current.is_terminal(items):
            endpoints.add(Allocation(current.x1))
            continue
        for _, child in _successors(sol, current):
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return endpoints


def _report(sol: EquilibriumSolution, nodes: List[Node], winners: List[int]) -> PathReport:
    endpoint = Allocation(nodes[-1].x1)
    prices = tuple(sol[n].price for n in nodes[:-1])
    return PathReport(
        tuple(nodes),
        endpoint,
        prices,
        tuple(winners),
        efficiency(sol.instance, nodes[0], endpoint),
    )


def extract_path_with_choices(
    sol: EquilibriumSolution, node: Node, choices: Sequence[int]
) -> PathReport:
    """
    Follows the equilibrium from `node`, giving the n-th tie met to buyer choices[n].

    Ties beyond the end of `choices` go to buyer 1.
    """
    items = sol.instance.items
    nodes, winners = [node], []
    ties = 0
    current = node
    while not current.is_terminal(items):
        options = sol[current].winners
        if len(options) == 1:
            buyer = options[0]
        else:
            buyer = choices[ties] if ties < len(choices) else 1
            if buyer not in (1, 2):
                raise ValueError(f"Tie choice must be 1 or 2, got {buyer!r}")
            ties += 1
        winners.append(buyer)
        current = current.child(buyer)
        nodes.append(current)
    return _report(sol, nodes, winners)


def extract_path(
    sol: EquilibriumSolution, node: Node = ROOT, policy: TiePolicy = TiePolicy.FAVOR_BUYER1
) -> PathReport:
    """The single equilibrium path realized from `node` under a tie-breaking policy."""
    policy = TiePolicy(policy)
    remaining = node.remaining(sol.instance.items)
    if policy is TiePolicy.FAVOR_BUYER1:
        choices = [1] * remaining
    elif policy is TiePolicy.FAVOR_BUYER2:
        choices = [2] * remaining
    else:
        choices = [1 if n % 2 == 0 else 2 for n in range(remaining)]
    return extract_path_with_choices(sol, node, choices)


def witness_path(
    sol: EquilibriumSolution, node: Node, endpoint: Allocation
) -> Optional[PathReport]:
    """An equilibrium path from `node` ending at `endpoint`, or None if there is none."""
    items = sol.instance.items
    target = endpoint.node(items)
    if not (0 <= target.x1 <= items and node.x1 <= target.x1 and node.x2 <= target.x2):
        return None
    # Nodes in the box between `node` and `target` that lie on an equilibrium path to it.
    reaches: Set[Node] = {target}
    for x1 in range(target.x1, node.x1 - 1, -1):
        for x2 in range(target.x2, node.x2 - 1, -1):
            current = Node(x1, x2)
            if current.is_terminal(items):
                continue
            if any(child in reaches for _, child in _successors(sol, current)):
                reaches.add(current)
    if node not in reaches:
        return None
    nodes, winners = [node], []
    current = node
    while current != target:
        buyer, current = next((b, c) for b, c in _successors(sol, current) if c in reaches)
        winners.append(buyer)
        nodes.append(current)
    return _report(sol, nodes, winners)


def equilibrium_paths(
    sol: EquilibriumSolution, node: Node = ROOT, limit: Optional[int] = None
) -> Iterator[PathReport]:
    """
    Enumerates equilibrium paths from `node` (depth-first, buyer 1 first at ties).

    The number of paths can grow exponentially with the number of ties; `limit` caps it.
    """
    items = sol.instance.items
    produced = 0
    stack: List[Tuple[List[Node], List[int]]] = [([node], [])]
    while stack:
        nodes, winners = stack.pop()
        current = nodes[-1]
        if current.is_terminal(items):
            yield _report(sol, nodes, winners)
            produced += 1
            if limit is not None and produced >= limit:
                return
            continue
        for buyer, child in reversed(_successors(sol, current)):
            stack.append((nodes + [child], winners + [buyer]))


def min_equilibrium_efficiency(sol: EquilibriumSolution) -> Fraction:
    """Lowest efficiency over every equilibrium endpoint reachable from the root."""
    return min(
        efficiency(sol.instance, ROOT, endpoint)
        for endpoint in reachable_equilibrium_endpoints(sol, ROOT)
    )


def revenue(path: PathReport) -> Fraction:
    """Total price paid along a path."""
    return sum(path.prices_paid, Fraction(0))


def solution_to_dict(sol: EquilibriumSolution) -> Dict[str, Any]:
    """
    Exports the node table keyed by "x1,x2" with exact rational strings.

    Terminal nodes carry only u1 and u2.
    """
    table: Dict[str, Dict[str, Any]] = {}
    for node in all_nodes(sol.instance.items):
        record = sol[node]
        entry: Dict[str, Any] = {"u1": format_rational(record.u1), "u2": format_rational(record.u2)}
        if not record.is_terminal:
            entry.update(
                {
                    "b1": format_rational(record.b1),
                    "b2": format_rational(record.b2),
                    "p": format_rational(record.price),
                    "outcome": record.outcome.value,
                }
            )
        table[node.key()] = entry
    return {"instance": sol.instance.to_dict(), "nodes": table}
