"""Tests for the exact two-phase simplex solver."""

from fractions import Fraction

import pytest

from seqauction_poa.simplex import (
    LinearProgram,
    LpStatus,
    Relation,
    Sense,
    SimplexTableau,
    dual_value,
    row_slacks,
    solve_exact,
)


def _lp(objective, rows, sense=Sense.MINIMIZE):
    lp = LinearProgram([f"x{i}" for i in range(len(objective))], objective, sense=sense)
    for coefficients, relation, rhs in rows:
        lp.add_constraint(coefficients, relation, rhs, label=f"row{len(lp.constraints)}")
    return lp


class TestSolveExact:
    """Known optima, statuses and duals."""

    def test_production_planning(self):
        lp = _lp(
            [3, 5],
            [
                ([1, 0], Relation.LE, 4),
                ([0, 2], Relation.LE, 12),
                ([3, 2], Relation.LE, 18),
            ],
            sense=Sense.MAXIMIZE,
        )
        result = solve_exact(lp)
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 36
        assert result.primal_solution == [2, 6]
        assert result.dual_solution == [0, Fraction(3, 2), 1]
        assert dual_value(lp, result.dual_solution) == 36

    def test_degenerate_program_terminates(self):
        """A degenerate program on which the largest-coefficient rule cycles."""
        lp = _lp(
            [10, -57, -9, -24],
            [
                (["1/2", "-11/2", "-5/2", 9], Relation.LE, 0),
                (["1/2", "-3/2", "-1/2", 1], Relation.LE, 0),
                ([1, 0, 0, 0], Relation.LE, 1),
            ],
            sense=Sense.MAXIMIZE,
        )
        result = solve_exact(lp)
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 1
        assert lp.is_feasible(result.primal_solution)
        assert dual_value(lp, result.dual_solution) == 1

    def test_negative_rhs_equality(self):
        lp = _lp([1, 1], [([-1, -1], Relation.EQ, -2)])
        result = solve_exact(lp)
        assert result.optimal_value == 2
        assert result.dual_solution == [-1]
        assert dual_value(lp, result.dual_solution) == 2

    def test_greater_equal_rows(self):
        lp = _lp([2, 3], [([1, 1], Relation.GE, 4), ([1, 0], Relation.LE, 3)])
        result = solve_exact(lp)
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 9
        assert result.primal_solution == [3, 1]
        assert dual_value(lp, result.dual_solution) == 9

    def test_redundant_equalities(self):
        lp = _lp([1, 2], [([1, 1], Relation.EQ, 1), ([2, 2], Relation.EQ, 2)])
        result = solve_exact(lp)
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 1
        assert result.primal_solution == [1, 0]

    def test_infeasible(self):
        lp = _lp([1], [([1], Relation.GE, 2), ([1], Relation.LE, 1)])
        assert solve_exact(lp).status is LpStatus.INFEASIBLE

    def test_unbounded(self):
        lp = _lp([1, 0], [([1, -1], Relation.LE, 1)], sense=Sense.MAXIMIZE)
        result = solve_exact(lp)
        assert result.status is LpStatus.UNBOUNDED
        assert result.optimal_value is None

    def test_no_constraints(self):
        result = solve_exact(_lp([1, 2], []))
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 0


class TestLinearProgram:
    """Test the program container."""

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            LinearProgram(["x"], [1, 2])
        lp = _lp([1, 2], [])
        with pytest.raises(ValueError):
            lp.add_constraint([1], Relation.LE, 1)

    def test_violations_and_slacks(self):
        lp = _lp([1, 1], [([1, 1], Relation.LE, 2), ([1, 0], Relation.GE, 1)])
        assert lp.is_feasible([Fraction(1), Fraction(1)])
        assert lp.violations([Fraction(0), Fraction(3)]) == ["row0", "row1"]
        assert lp.violations([Fraction(-1), Fraction(0)]) == ["x0 >= 0", "row1"]
        assert row_slacks(lp, [Fraction(1), Fraction(0)]) == {"row0": 1, "row1": 0}


class TestSimplexTableau:
    """Rows are integer numerators over one denominator, kept in lowest terms."""

    def test_rows_are_stored_over_a_common_denominator(self):
        tableau = SimplexTableau(
            [{0: Fraction(1, 2), 1: Fraction(1, 3)}], [Fraction(1)], [0], width=2
        )
        assert tableau.rows == [{0: 3, 1: 2, 2: 6}]
        assert tableau.dens == [6]

    def test_pivot_scales_the_row_to_a_unit_entry(self):
        tableau = SimplexTableau(
            [{0: Fraction(1, 2), 1: Fraction(1, 3)}, {1: Fraction(2), 2: Fraction(1)}],
            [Fraction(1), Fraction(4)],
            [0, 2],
            width=3,
        )
        tableau.pivot(0, 1)
        assert tableau.basis == [1, 2]
        assert tableau.basic_values() == [3, -2]
        assert tableau.rows[0][1] == tableau.dens[0]
        assert 1 not in tableau.rows[1]

    def test_fractional_data(self):
        lp = _lp(
            [1, 1],
            [
                (["1/3", "2/7"], Relation.GE, 1),
                ([1, 0], Relation.LE, "3/2"),
            ],
        )
        result = solve_exact(lp)
        assert result.optimal_value == Fraction(13, 4)
        assert result.primal_solution == [Fraction(3, 2), Fraction(7, 4)]
        assert result.dual_solution == [Fraction(7, 2), Fraction(-1, 6)]
        assert dual_value(lp, result.dual_solution) == Fraction(13, 4)
