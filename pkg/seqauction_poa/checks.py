"""
Executable structural properties of equilibria in the two-buyer sequential auction.

Every check returns a CheckReport instead of raising, so a batch run can collect the full
inventory of violations. All of these properties are theorems about exact equilibria: any
witness points at a bug in the solver or in the check itself.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from seqauction_poa.auction import (
    BUYERS,
    ROOT,
    AuctionInstance,
    Node,
    all_nodes,
    efficiency,
    opt_welfare,
    other,
    social_welfare,
)
from seqauction_poa.equilibrium import (
    EquilibriumSolution,
    PathReport,
    TiePolicy,
    extract_path,
    reachable_equilibrium_endpoints,
    resolve_utilities,
    witness_path,
)
from seqauction_poa.rational_utils import format_rational


@dataclass(frozen=True)
class Witness:
    """A single violation: where it happened, the value required and the value found."""

    where: str
    expected: Fraction
    actual: Fraction
    detail: str = ""

    def to_dict(self) -> Dict[str, str]:
        return {
            "where": self.where,
            "expected": format_rational(self.expected),
            "actual": format_rational(self.actual),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CheckReport:
    """
    Outcome of one check.

    Attributes:
        check_name (str): Identifier of the check.
        passed (bool): True iff no witnesses were found.
        witnesses (Tuple[Witness, ...]): Violations, empty when passed.
    """

    check_name: str
    passed: bool
    witnesses: Tuple[Witness, ...] = field(default_factory=tuple)

    @classmethod
    def from_witnesses(cls, name: str, witnesses: Iterable[Witness]) -> "CheckReport":
        witnesses = tuple(witnesses)
        return cls(name, not witnesses, witnesses)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check_name,
            "passed": self.passed,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def _path_label(path: PathReport) -> str:
    return "path " + "->".join(f"({n.key()})" for n in path.nodes)


def _v(inst: AuctionInstance, buyer: int, node: Node) -> Fraction:
    """Incremental value of buyer's next item at `node`."""
    return inst.v(buyer, node.won(buyer) + 1)


def check_no_free_win(sol: EquilibriumSolution) -> CheckReport:
    """u_i(x) >= u_i(x + e_-i), strictly iff buyer i's bid is strictly greater at x."""
    witnesses = []
    for node in sol.decision_nodes():
        record = sol[node]
        for buyer in BUYERS:
            here = record.u(buyer)
            conceded = sol.u(buyer, node.child(other(buyer)))
            strict_bid = record.bid(buyer) > record.bid(other(buyer))
            if here < conceded:
                witnesses.append(
                    Witness(f"({node.key()}) buyer {buyer}", conceded, here, "u_i(x) < u_i(x+e_-i)")
                )
            elif (here > conceded) != strict_bid:
                witnesses.append(
                    Witness(
                        f"({node.key()}) buyer {buyer}",
                        conceded,
                        here,
                        f"strict utility gap {here > conceded} but strict bid win {strict_bid}",
                    )
                )
    return CheckReport.from_witnesses("no_free_win", witnesses)


def check_declining_prices(sol: EquilibriumSolution) -> CheckReport:
    """
    p(x) >= p(x + e_i) whenever buyer i (weakly) wins at x and t(x) > 1, with equality
    iff buyer i also weakly wins at x + e_-i.
    """
    items = sol.instance.items
    witnesses = []
    for node in sol.decision_nodes():
        if node.remaining(items) <= 1:
            continue
        record = sol[node]
        for buyer in record.winners:
            after = sol[node.child(buyer)].price
            sibling = sol[node.child(other(buyer))]
            where = f"({node.key()}) winner {buyer}"
            if record.price < after:
                witnesses.append(Witness(where, after, record.price, "price increased"))
            elif (record.price == after) != sibling.wins_weakly(buyer):
                witnesses.append(
                    Witness(
                        where,
                        after,
                        record.price,
                        f"price equality {record.price == after} but winner also wins at "
                        f"({node.child(other(buyer)).key()}) is {sibling.wins_weakly(buyer)}",
                    )
                )
    return CheckReport.from_witnesses("declining_prices", witnesses)


def check_nonnegativity(sol: EquilibriumSolution) -> CheckReport:
    """All forward utilities and all prices are non-negative."""
    witnesses = []
    for node in all_nodes(sol.instance.items):
        record = sol[node]
        for buyer in BUYERS:
            if record.u(buyer) < 0:
                witnesses.append(
                    Witness(f"({node.key()}) u{buyer}", Fraction(0), record.u(buyer), "negative")
                )
        if record.price is not None and record.price < 0:
            witnesses.append(Witness(f"({node.key()}) p", Fraction(0), record.price, "negative"))
    return CheckReport.from_witnesses("nonnegativity", witnesses)


def check_utility_upper_bound(sol: EquilibriumSolution, path: PathReport) -> CheckReport:
    """Along an equilibrium path, u_i(x^s) is at most the value of the items i still wins."""
    inst = sol.instance
    final = path.nodes[-1]
    witnesses = []
    for node in path.nodes:
        for buyer in BUYERS:
            valuation = inst.valuation(buyer)
            bound = valuation.cumulative(final.won(buyer)) - valuation.cumulative(node.won(buyer))
            actual = sol.u(buyer, node)
            if actual > bound:
                witnesses.append(
                    Witness(f"{_path_label(path)} at ({node.key()}) u{buyer}", bound, actual)
                )
    return CheckReport.from_witnesses("utility_upper_bound", witnesses)


def check_utility_difference(sol: EquilibriumSolution) -> CheckReport:
    """u_i - u_-i = v_i(x_i+1) + u_i(x+e_i) - v_-i(x_-i+1) - u_-i(x+e_-i), both orientations."""
    inst = sol.instance
    witnesses = []
    for node in sol.decision_nodes():
        for buyer in BUYERS:
            rival = other(buyer)
            actual = sol.u(buyer, node) - sol.u(rival, node)
            expected = (
                _v(inst, buyer, node)
                + sol.u(buyer, node.child(buyer))
                - _v(inst, rival, node)
                - sol.u(rival, node.child(rival))
            )
            if actual != expected:
                witnesses.append(Witness(f"({node.key()}) buyer {buyer}", expected, actual))
    return CheckReport.from_witnesses("utility_difference", witnesses)


def check_path_efficiency_bound(sol: EquilibriumSolution, path: PathReport) -> CheckReport:
    """
    Dropping the first step of a suffix never raises its efficiency when some optimal split at
    that node agrees with the step: buyer 1 wins and an optimum gives buyer 1 at least one item,
    or buyer 2 wins and an optimum gives buyer 2 at least one item.

    Uses only the nodes and winners of `path`, so it applies to any path, equilibrium or not.
    """
    inst = sol.instance
    items = inst.items
    witnesses = []
    for step, node in enumerate(path.nodes[:-1]):
        _, argmax = opt_welfare(inst, node)
        winner = path.winners[step]
        if winner == 1 and max(argmax) == 0:
            continue
        if winner == 2 and min(argmax) == node.remaining(items):
            continue
        full = efficiency(inst, node, path.endpoint)
        shorter = efficiency(inst, path.nodes[step + 1], path.endpoint)
        if full < shorter:
            witnesses.append(
                Witness(
                    f"{_path_label(path)} at ({node.key()})",
                    shorter,
                    full,
                    f"buyer {winner} wins with optimal splits {sorted(argmax)}",
                )
            )
    return CheckReport.from_witnesses("path_efficiency_bound", witnesses)


def check_subpath_efficiency(sol: EquilibriumSolution, path: PathReport) -> CheckReport:
    """
    Wherever dropping the first step of a suffix raises its efficiency, exactly one holds:
    (a) sw(.|x) is uniquely maximized by buyer 1 taking everything and buyer 2 wins at x, or
    (b) sw(.|x) is uniquely maximized by buyer 2 taking everything and buyer 1 wins at x.
    """
    inst = sol.instance
    items = inst.items
    witnesses = []
    for step, node in enumerate(path.nodes[:-1]):
        full = efficiency(inst, node, path.endpoint)
        shorter = efficiency(inst, path.nodes[step + 1], path.endpoint)
        if not full < shorter:
            continue
        _, argmax = opt_welfare(inst, node)
        winner = path.winners[step]
        case_a = argmax == frozenset({node.remaining(items)}) and winner == 2
        case_b = argmax == frozenset({0}) and winner == 1
        if case_a == case_b:
            witnesses.append(
                Witness(
                    f"{_path_label(path)} at ({node.key()})",
                    shorter,
                    full,
                    f"efficiency drops but argmax {sorted(argmax)} with buyer {winner} winning "
                    "matches neither or both cases",
                )
            )
    return CheckReport.from_witnesses("subpath_efficiency", witnesses)


def path_inequality_sides(
    sol: EquilibriumSolution, node: Node, k: int
) -> Tuple[Fraction, Fraction]:
    """
    Both sides of the bound on buyer 2's utilities along the row x + j*e1:

        sum_{j=0}^{t(x)} u2(x + j e1)
            <= sum_{i=x2+1}^{T-k} [(T - x1 - i + 1) v2(i) - sum_{j=k+1}^{T-i+1} v1(j)]

    Off-path nodes x + j*e1 are read from the full solved lattice.
    """
    inst = sol.instance
    items = inst.items
    v1, v2 = inst.valuation_1, inst.valuation_2
    lhs = sum(
        (sol.u(2, Node(node.x1 + j, node.x2)) for j in range(node.remaining(items) + 1)),
        Fraction(0),
    )
    rhs = Fraction(0)
    for i in range(node.x2 + 1, items - k + 1):
        lost = v1.cumulative(items - i + 1) - v1.cumulative(k)
        rhs += (items - node.x1 - i + 1) * v2.v(i) - lost
    return lhs, rhs


def check_theorem_path_inequality(sol: EquilibriumSolution, path: PathReport) -> CheckReport:
    """The row bound of `path_inequality_sides` at every node of an equilibrium path."""
    k = path.endpoint.k
    witnesses = []
    for node in path.nodes:
        lhs, rhs = path_inequality_sides(sol, node, k)
        if lhs > rhs:
            witnesses.append(Witness(f"{_path_label(path)} at ({node.key()})", rhs, lhs))
    return CheckReport.from_witnesses("path_inequality", witnesses)


def valid_inequality_forms(inst: AuctionInstance, k: int, ell: int) -> Tuple[Fraction, Fraction]:
    """
    The valid inequality for endpoint (k, T-k) and index ell in its summed form and in its
    rearranged form:

        summed:      sum_{i=ell+1}^{T-k} [(T-i+1) v2(i) - sum_{j=k+1}^{T-i+1} v1(j)]
        rearranged:  sum_{i=ell+1}^{T-k} (T-i+1) v2(i) - sum_{i=k+1}^{T-ell} (T-i-ell+1) v1(i)
    """
    items = inst.items
    v1, v2 = inst.valuation_1, inst.valuation_2
    summed = Fraction(0)
    for i in range(ell + 1, items - k + 1):
        summed += (items - i + 1) * v2.v(i) - (v1.cumulative(items - i + 1) - v1.cumulative(k))
    rearranged = sum(
        ((items - i + 1) * v2.v(i) for i in range(ell + 1, items - k + 1)), Fraction(0)
    ) - sum(
        ((items - i - ell + 1) * v1.v(i) for i in range(k + 1, items - ell + 1)), Fraction(0)
    )
    return summed, rearranged


def _check_k(inst: AuctionInstance, k: int) -> None:
    if not 0 <= k <= inst.items:
        raise ValueError(f"k = {k} outside 0..{inst.items}")


def check_valid_inequality_forms(inst: AuctionInstance, k: int) -> CheckReport:
    """The summed and rearranged forms of the valid inequality agree exactly for every ell."""
    _check_k(inst, k)
    witnesses = []
    for ell in range(inst.items - k):
        summed, rearranged = valid_inequality_forms(inst, k, ell)
        if summed != rearranged:
            witnesses.append(Witness(f"k={k} ell={ell}", summed, rearranged, "forms differ"))
    return CheckReport.from_witnesses("valid_inequality_forms", witnesses)


def check_valid_inequalities(inst: AuctionInstance, k: int) -> CheckReport:
    """
    The valid inequalities for endpoint (k, T-k): non-negative for every 0 <= ell < T-k.

    Only meaningful when (k, T-k) is an equilibrium endpoint from the root; the caller
    guarantees that. Also reports any disagreement between the two algebraic forms.
    """
    _check_k(inst, k)
    witnesses = []
    for ell in range(inst.items - k):
        summed, rearranged = valid_inequality_forms(inst, k, ell)
        if summed != rearranged:
            witnesses.append(Witness(f"k={k} ell={ell}", summed, rearranged, "forms differ"))
        if rearranged < 0:
            witnesses.append(Witness(f"k={k} ell={ell}", Fraction(0), rearranged, "negative"))
    return CheckReport.from_witnesses("valid_inequalities", witnesses)


def check_bid_characterization(sol: EquilibriumSolution) -> CheckReport:
    """b_i >= b_-i iff v_i(x_i+1) + U(x+e_i) >= v_-i(x_-i+1) + U(x+e_-i)."""
    inst = sol.instance
    witnesses = []
    for node in sol.decision_nodes():
        record = sol[node]
        for buyer in BUYERS:
            rival = other(buyer)
            mine = _v(inst, buyer, node) + sol.U(node.child(buyer))
            theirs = _v(inst, rival, node) + sol.U(node.child(rival))
            if (record.bid(buyer) >= record.bid(rival)) != (mine >= theirs):
                witnesses.append(Witness(f"({node.key()}) buyer {buyer}", theirs, mine))
    return CheckReport.from_witnesses("bid_characterization", witnesses)


def check_max_form(sol: EquilibriumSolution) -> CheckReport:
    """u_i(x) = max_j [v_j(x_j+1) + U(x+e_j)] - v_-i(x_-i+1) - u_-i(x+e_-i)."""
    inst = sol.instance
    witnesses = []
    for node in sol.decision_nodes():
        best = max(_v(inst, j, node) + sol.U(node.child(j)) for j in BUYERS)
        for buyer in BUYERS:
            rival = other(buyer)
            expected = best - _v(inst, rival, node) - sol.u(rival, node.child(rival))
            if sol.u(buyer, node) != expected:
                witnesses.append(
                    Witness(f"({node.key()}) u{buyer}", expected, sol.u(buyer, node))
                )
    return CheckReport.from_witnesses("max_form", witnesses)


def check_tie_invariance(sol: EquilibriumSolution) -> CheckReport:
    """At every tie, awarding the item to either buyer gives the same utilities."""
    inst = sol.instance
    witnesses = []
    for node in sol.decision_nodes():
        record = sol[node]
        if len(record.winners) < 2:
            continue
        first = resolve_utilities(inst, sol.records, node, record.b1, record.b2, 1)
        second = resolve_utilities(inst, sol.records, node, record.b1, record.b2, 2)
        for buyer in BUYERS:
            if first[buyer - 1] != second[buyer - 1]:
                witnesses.append(
                    Witness(f"({node.key()}) u{buyer}", first[buyer - 1], second[buyer - 1])
                )
    return CheckReport.from_witnesses("tie_invariance", witnesses)


def check_welfare_bounds(inst: AuctionInstance) -> CheckReport:
    """0 <= sw(k|x) <= opt(x) and sw(k|x+e1) = sw(k+1|x) - v1(x1+1) at every decision node."""
    items = inst.items
    witnesses = []
    for node in all_nodes(items):
        if node.is_terminal(items):
            continue
        best, _ = opt_welfare(inst, node)
        for k in range(node.remaining(items) + 1):
            welfare = social_welfare(inst, node, k)
            if welfare < 0 or welfare > best:
                where = f"({node.key()}) k={k}"
                witnesses.append(Witness(where, best, welfare, "outside [0, opt]"))
        for k in range(node.remaining(items)):
            shifted = social_welfare(inst, node.child(1), k)
            expected = social_welfare(inst, node, k + 1) - _v(inst, 1, node)
            if shifted != expected:
                where = f"({node.key()}) k={k}"
                witnesses.append(Witness(where, expected, shifted, "shift identity"))
    return CheckReport.from_witnesses("welfare_bounds", witnesses)


def default_paths(sol: EquilibriumSolution) -> List[PathReport]:
    """One witness path per reachable root endpoint plus the path of each tie policy."""
    paths = []
    for endpoint in sorted(reachable_equilibrium_endpoints(sol, ROOT)):
        path = witness_path(sol, ROOT, endpoint)
        if path is not None:
            paths.append(path)
    paths.extend(extract_path(sol, ROOT, policy) for policy in TiePolicy)
    return paths


def _merge(name: str, reports: Sequence[CheckReport]) -> CheckReport:
    return CheckReport.from_witnesses(name, (w for r in reports for w in r.witnesses))


def run_all_checks(
    sol: EquilibriumSolution, paths: Optional[Sequence[PathReport]] = None
) -> List[CheckReport]:
    """
    Runs every check on a solved instance.

    Path checks run over `paths` (default: `default_paths`) and are merged into one report
    each. Valid inequalities run for every reachable root endpoint (k, T-k) with k < T.

    Returns:
        List[CheckReport]: One report per check, in a fixed order.
    """
    inst = sol.instance
    if paths is None:
        paths = default_paths(sol)
    endpoints = sorted(e.k for e in reachable_equilibrium_endpoints(sol, ROOT) if e.k < inst.items)
    return [
        check_bid_characterization(sol),
        check_max_form(sol),
        check_tie_invariance(sol),
        check_welfare_bounds(inst),
        check_no_free_win(sol),
        check_declining_prices(sol),
        check_nonnegativity(sol),
        _merge("utility_upper_bound", [check_utility_upper_bound(sol, p) for p in paths]),
        check_utility_difference(sol),
        _merge("path_efficiency_bound", [check_path_efficiency_bound(sol, p) for p in paths]),
        _merge("subpath_efficiency", [check_subpath_efficiency(sol, p) for p in paths]),
        _merge("path_inequality", [check_theorem_path_inequality(sol, p) for p in paths]),
        _merge("valid_inequalities", [check_valid_inequalities(inst, k) for k in endpoints]),
    ]
