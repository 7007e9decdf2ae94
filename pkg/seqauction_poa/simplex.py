"""
Exact two-phase simplex over rationals with Bland's anti-cycling rule.

Every variable is bounded below by zero. Constraints are converted to equality form with
slack, surplus and artificial columns. Rows are kept sparse with integer numerators, so a pivot
only touches nonzero entries.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Set, Tuple

from seqauction_poa.rational_utils import RationalLike, parse_rational


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Sense(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Constraint:
    """A row `coefficients . x  relation  rhs`, labelled with the family it belongs to."""

    coefficients: Tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction
    label: str = ""

    def lhs(self, point: Sequence[Fraction]) -> Fraction:
        return sum((a * x for a, x in zip(self.coefficients, point) if a), Fraction(0))

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        value = self.lhs(point)
        if self.relation is Relation.LE:
            return value <= self.rhs
        if self.relation is Relation.GE:
            return value >= self.rhs
        return value == self.rhs


@dataclass
class LinearProgram:
    """
    A linear program over non-negative variables with exact rational data.

    Attributes:
        variables (List[str]): Variable names; their order fixes the coefficient layout.
        objective (List[Fraction]): Objective coefficients.
        constraints (List[Constraint]): Rows in insertion order.
        sense (Sense): MINIMIZE or MAXIMIZE.
    """

    variables: List[str]
    objective: List[Fraction]
    constraints: List[Constraint] = field(default_factory=list)
    sense: Sense = Sense.MINIMIZE

    def __post_init__(self):
        if len(self.objective) != len(self.variables):
            raise ValueError(
                f"Objective has {len(self.objective)} coefficients "
                f"for {len(self.variables)} variables"
            )
        self.objective = [parse_rational(c) for c in self.objective]

    @property
    def size(self) -> int:
        return len(self.variables)

    def add_constraint(
        self,
        coefficients: Sequence[RationalLike],
        relation: Relation,
        rhs: RationalLike,
        label: str = "",
    ) -> None:
        if len(coefficients) != self.size:
            raise ValueError(
                f"Constraint '{label}' has {len(coefficients)} coefficients, expected {self.size}"
            )
        self.constraints.append(
            Constraint(
                tuple(parse_rational(c) for c in coefficients),
                Relation(relation),
                parse_rational(rhs),
                label,
            )
        )

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * x for c, x in zip(self.objective, point) if c), Fraction(0))

    def violations(self, point: Sequence[Fraction]) -> List[str]:
        """Labels of the rows (and bounds) that `point` violates."""
        broken = [f"{name} >= 0" for name, x in zip(self.variables, point) if x < 0]
        broken.extend(
            c.label or f"row {i}"
            for i, c in enumerate(self.constraints)
            if not c.satisfied_by(point)
        )
        return broken

    def is_feasible(self, point: Sequence[Fraction]) -> bool:
        return len(point) == self.size and not self.violations(point)


@dataclass
class LpSolveResult:
    """
    Result of `solve_exact`.

    Attributes:
        status (LpStatus): Optimal, Infeasible or Unbounded.
        optimal_value (Optional[Fraction]): Objective at the optimum (None otherwise).
        primal_solution (List[Fraction]): Optimal basic solution (empty otherwise).
        dual_solution (List[Fraction]): One multiplier per constraint, in row order, such that
            the dual objective rhs . y equals the optimal value.
        pivots (int): Number of pivots over both phases.
    """

    status: LpStatus
    optimal_value: Optional[Fraction] = None
    primal_solution: List[Fraction] = field(default_factory=list)
    dual_solution: List[Fraction] = field(default_factory=list)
    pivots: int = 0


def _normalize(entries: Dict[int, int], den: int) -> int:
    """Divides a row's numerators and its denominator by their common factor in place."""
    g = gcd(den, *entries.values())
    if g > 1:
        for col in entries:
            entries[col] //= g
        den //= g
    return den


def _integer_row(values: Dict[int, Fraction]) -> Tuple[Dict[int, int], int]:
    den = lcm(*(v.denominator for v in values.values()))
    entries = {col: v.numerator * (den // v.denominator) for col, v in values.items() if v}
    return entries, _normalize(entries, den)


class SimplexTableau:
    """
    Equality-form tableau `rows . x = rhs` with an explicit basis and a reduced-cost row.

    Each row is a sparse dict of integer numerators over one positive row denominator, with the
    right-hand side stored under the extra column `width`. Pivots then cost integer arithmetic
    on the nonzero entries of the rows the entering column touches.
    """

    def __init__(
        self, rows: List[Dict[int, Fraction]], rhs: List[Fraction], basis: List[int], width: int
    ):
        self.width = width
        self.rows: List[Dict[int, int]] = []
        self.dens: List[int] = []
        for row, value in zip(rows, rhs):
            entries, den = _integer_row({**row, width: value})
            self.rows.append(entries)
            self.dens.append(den)
        self.basis = basis
        self.costs: List[Fraction] = [Fraction(0)] * width
        self.reduced: Dict[int, int] = {}
        self.reduced_den = 1
        self.pivots = 0

    def price_out(self, costs: List[Fraction]) -> None:
        """Installs a cost vector and recomputes reduced costs for the current basis."""
        self.costs = costs
        reduced: Dict[int, Fraction] = {j: c for j, c in enumerate(costs) if c}
        for row, den, basic in zip(self.rows, self.dens, self.basis):
            weight = costs[basic]
            if weight:
                for col, a in row.items():
                    if col != self.width:
                        reduced[col] = reduced.get(col, Fraction(0)) - weight * Fraction(a, den)
        self.reduced, self.reduced_den = _integer_row(reduced)

    def reduced_cost(self, j: int) -> Fraction:
        return Fraction(self.reduced.get(j, 0), self.reduced_den)

    def basic_values(self) -> List[Fraction]:
        """Value of each row's basic variable; the basic entry of every row is 1."""
        return [Fraction(row.get(self.width, 0), den) for row, den in zip(self.rows, self.dens)]

    @staticmethod
    def _eliminate(
        target: Dict[int, int], den: int, row: Dict[int, int], j: int
    ) -> Tuple[Dict[int, int], int]:
        """Subtracts the multiple of `row` (whose column j equals its denominator) zeroing j."""
        p, f = row[j], target[j]
        g = gcd(p, f)
        p, f = p // g, f // g
        updated = {col: a * p for col, a in target.items()}
        for col, a in row.items():
            value = updated.get(col, 0) - f * a
            if value:
                updated[col] = value
            else:
                updated.pop(col, None)
        return updated, _normalize(updated, den * p)

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        den = row[j]
        if den < 0:
            row = {col: -a for col, a in row.items()}
            den = -den
        den = _normalize(row, den)
        self.rows[i], self.dens[i] = row, den
        for r, other in enumerate(self.rows):
            if r != i and j in other:
                self.rows[r], self.dens[r] = self._eliminate(other, self.dens[r], row, j)
        if j in self.reduced:
            self.reduced, self.reduced_den = self._eliminate(
                self.reduced, self.reduced_den, row, j
            )
        self.basis[i] = j
        self.pivots += 1

    def bland_step(self, allowed: Set[int]) -> str:
        """One Bland pivot. Returns 'optimal', 'unbounded' or 'go_on'."""
        entering = min((j for j, a in self.reduced.items() if a < 0 and j in allowed), default=None)
        if entering is None:
            return "optimal"
        best: Optional[Tuple[Fraction, int, int]] = None
        for i, row in enumerate(self.rows):
            a = row.get(entering, 0)
            if a > 0:
                candidate = (Fraction(row.get(self.width, 0), a), self.basis[i], i)
                if best is None or candidate < best:
                    best = candidate
        if best is None:
            return "unbounded"
        self.pivot(best[2], entering)
        return "go_on"

    def run(self, allowed: Set[int]) -> str:
        while True:
            status = self.bland_step(allowed)
            if status != "go_on":
                return status

    def drop_row(self, i: int) -> None:
        del self.rows[i]
        del self.dens[i]
        del self.basis[i]

    def value(self) -> Fraction:
        values = self.basic_values()
        return sum((self.costs[b] * x for b, x in zip(self.basis, values)), Fraction(0))


def solve_exact(lp: LinearProgram) -> LpSolveResult:
    """
    Solves a linear program exactly.

    Phase I minimizes the sum of artificial variables from the slack/artificial basis; phase II
    optimizes the real objective with artificial columns barred from entering. Bland's rule
    (lowest-index entering column, lowest-index leaving variable on ratio ties) prevents
    cycling on degenerate vertices.

    Args:
        lp (LinearProgram): The program to solve.

    Returns:
        LpSolveResult: Status, optimal value, primal point and row multipliers.
    """
    n = lp.size
    m = len(lp.constraints)
    sign = 1 if lp.sense is Sense.MINIMIZE else -1

    # Normalize to rhs >= 0, remembering which rows were negated.
    flipped: List[bool] = []
    normalized: List[Tuple[List[Fraction], Relation, Fraction]] = []
    for c in lp.constraints:
        coefficients, relation, rhs = list(c.coefficients), c.relation, c.rhs
        if rhs < 0:
            coefficients = [-a for a in coefficients]
            rhs = -rhs
            relation = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(relation, relation)
            flipped.append(True)
        else:
            flipped.append(False)
        normalized.append((coefficients, relation, rhs))

    extra = sum(1 for _, relation, _ in normalized if relation is not Relation.EQ)
    artificial_count = sum(1 for _, relation, _ in normalized if relation is not Relation.LE)
    width = n + extra + artificial_count

    rows: List[Dict[int, Fraction]] = []
    rhs_values: List[Fraction] = []
    basis: List[int] = []
    # Column that carries +1 in row i and nothing elsewhere at the start, with its sign in the
    # original row; used to read off row multipliers from the reduced costs.
    marker: List[Tuple[int, int]] = []
    artificials: Set[int] = set()
    next_extra, next_artificial = n, n + extra
    for coefficients, relation, rhs in normalized:
        row = {j: a for j, a in enumerate(coefficients) if a}
        if relation is Relation.LE:
            row[next_extra] = Fraction(1)
            basis.append(next_extra)
            marker.append((next_extra, 1))
            next_extra += 1
        else:
            if relation is Relation.GE:
                row[next_extra] = Fraction(-1)
                next_extra += 1
            row[next_artificial] = Fraction(1)
            basis.append(next_artificial)
            marker.append((next_artificial, 1))
            artificials.add(next_artificial)
            next_artificial += 1
        rows.append(row)
        rhs_values.append(rhs)

    tableau = SimplexTableau(rows, rhs_values, basis, width)
    active_rows = list(range(m))

    if artificials:
        tableau.price_out([Fraction(1) if j in artificials else Fraction(0) for j in range(width)])
        tableau.run(set(range(width)))
        if tableau.value() > 0:
            return LpSolveResult(LpStatus.INFEASIBLE, pivots=tableau.pivots)
        # Drive zero-level artificials out of the basis; rows with no other support are redundant.
        i = 0
        while i < len(tableau.rows):
            if tableau.basis[i] in artificials:
                row = tableau.rows[i]
                j = min((j for j in row if j < width and j not in artificials), default=None)
                if j is None:
                    tableau.drop_row(i)
                    del active_rows[i]
                    continue
                tableau.pivot(i, j)
            i += 1

    costs = [sign * c for c in lp.objective] + [Fraction(0)] * (width - n)
    tableau.price_out(costs)
    status = tableau.run(set(range(width)) - artificials)
    if status == "unbounded":
        return LpSolveResult(LpStatus.UNBOUNDED, pivots=tableau.pivots)

    primal = [Fraction(0)] * n
    for basic, value in zip(tableau.basis, tableau.basic_values()):
        if basic < n:
            primal[basic] = value

    # Reduced cost of a marker column with zero cost is -y_i for the normalized row.
    duals = [Fraction(0)] * m
    kept = set(active_rows)
    for i in range(m):
        if i not in kept:
            continue
        column, _ = marker[i]
        y = -tableau.reduced_cost(column)
        if flipped[i]:
            y = -y
        duals[i] = sign * y

    return LpSolveResult(
        LpStatus.OPTIMAL,
        optimal_value=lp.evaluate(primal),
        primal_solution=primal,
        dual_solution=duals,
        pivots=tableau.pivots,
    )


def dual_value(lp: LinearProgram, duals: Sequence[Fraction]) -> Fraction:
    """rhs . y for a vector of row multipliers."""
    return sum((c.rhs * y for c, y in zip(lp.constraints, duals)), Fraction(0))


def row_slacks(lp: LinearProgram, point: Sequence[Fraction]) -> Dict[str, Fraction]:
    """rhs - lhs for each labelled row (negated for >= rows), so a negative value is a violation."""
    slacks = {}
    for i, c in enumerate(lp.constraints):
        gap = c.rhs - c.lhs(point)
        slacks[c.label or f"row {i}"] = -gap if c.relation is Relation.GE else gap
    return slacks
