"""Tests for the efficiency LPs, their dual certificates and the bound formulas."""

from dataclasses import replace
from fractions import Fraction

import pytest

from seqauction_poa.equilibrium import min_equilibrium_efficiency, solve
from seqauction_poa.instances import tight_concave, tight_general
from seqauction_poa.lp import (
    CONCAVITY,
    NORMALIZATION,
    SIGNS,
    VALID,
    WELFARE,
    build_primal,
    concave_bound_row,
    concave_dual_certificate,
    dual_objective,
    dual_slacks,
    general_dual_certificate,
    lp_optimum,
    poa_bound_concave,
    poa_bound_concave_min,
    poa_bound_concave_min_by_enumeration,
    poa_bound_general,
    primal_point_from_instance,
    verify_dual,
    weak_duality_gap,
)
from seqauction_poa.rational_utils import one_minus_inv_e_lower, one_minus_inv_e_upper
from seqauction_poa.simplex import LpStatus


def _grid(max_T):
    return [(T, k) for T in range(1, max_T + 1) for k in range(T)]


class TestPrimal:
    """Test the shape of the primal LP."""

    def test_row_families(self):
        lp = build_primal(3, 1, concave=True)
        labels = [c.label for c in lp.constraints]
        assert labels[0] == NORMALIZATION
        assert sum(label.startswith(WELFARE) for label in labels) == 3
        assert sum(label.startswith(VALID) for label in labels) == 2
        assert sum(label.startswith(CONCAVITY) for label in labels) == 4
        assert len(build_primal(3, 1, concave=False).constraints) == 6

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            build_primal(3, 3, concave=True)
        with pytest.raises(ValueError):
            build_primal(0, 0, concave=False)

    def test_single_item(self):
        result = lp_optimum(1, 0, concave=True)
        assert result.status is LpStatus.OPTIMAL
        assert result.optimal_value == 1


class TestConcaveBound:
    """Formula, LP optimum, dual objective and tight instance agree exactly."""

    def test_formula_values(self):
        assert poa_bound_concave(2, 1) == Fraction(3, 4)
        assert poa_bound_concave(3, 1) == Fraction(13, 18)
        assert poa_bound_concave(4, 4) == 1
        with pytest.raises(ValueError):
            poa_bound_concave(3, 4)

    @pytest.mark.parametrize("T,k", _grid(6))
    def test_four_way_equality(self, T, k):
        bound = poa_bound_concave(T, k)
        assert lp_optimum(T, k, concave=True).optimal_value == bound
        assert dual_objective(concave_dual_certificate(T, k)) == bound
        assert min_equilibrium_efficiency(solve(tight_concave(T, k))) == bound

    def test_largest_lp_of_the_grid(self):
        assert lp_optimum(25, 9, concave=True).optimal_value == poa_bound_concave(25, 9)

    @pytest.mark.slow
    def test_four_way_equality_full_grid(self):
        for T, k in _grid(25):
            bound = poa_bound_concave(T, k)
            assert lp_optimum(T, k, concave=True).optimal_value == bound, (T, k)
            assert dual_objective(concave_dual_certificate(T, k)) == bound, (T, k)
            assert min_equilibrium_efficiency(solve(tight_concave(T, k))) == bound, (T, k)

    @pytest.mark.parametrize("T,k", _grid(5))
    def test_tight_instance_is_an_optimal_primal_point(self, T, k):
        lp = build_primal(T, k, concave=True)
        point = primal_point_from_instance(tight_concave(T, k))
        assert lp.is_feasible(point)
        assert weak_duality_gap(lp, point, concave_dual_certificate(T, k)) == 0

    def test_bound_row(self):
        row = concave_bound_row(2, 1, with_lp=True, tight_efficiency=Fraction(3, 4))
        assert row == {
            "T": 2,
            "k": 1,
            "formula": Fraction(3, 4),
            "lp_opt": Fraction(3, 4),
            "dual_obj": Fraction(3, 4),
            "tight_instance_eff": Fraction(3, 4),
        }
        assert concave_bound_row(2, 1)["lp_opt"] is None


class TestDualCertificates:
    """Replay the feasibility proofs of the closed-form duals."""

    @pytest.mark.parametrize("T,k", _grid(10))
    def test_concave_certificate_is_feasible_and_tight(self, T, k):
        report = verify_dual(concave_dual_certificate(T, k), T, k, concave=True)
        assert report.passed, report.to_dict()

    @pytest.mark.slow
    def test_concave_certificate_full_grid(self):
        for T, k in _grid(30):
            assert verify_dual(concave_dual_certificate(T, k), T, k, concave=True).passed, (T, k)

    @pytest.mark.parametrize("T,k", _grid(10))
    def test_general_certificate_is_feasible(self, T, k):
        cert = general_dual_certificate(T, k)
        assert verify_dual(cert, T, k, concave=False).passed
        assert dual_objective(cert) == Fraction(1, T)

    def test_perturbed_certificate_fails(self):
        cert = concave_dual_certificate(4, 1)
        broken = cert.with_sigma_T(cert.sigma[-1] + Fraction(1, 100))
        report = verify_dual(broken, 4, 1, concave=True)
        assert not report.passed
        assert report.witnesses

    def test_negative_mu_violates_sign_row(self):
        cert = general_dual_certificate(3, 0)
        assert all(row.satisfied for row in dual_slacks(cert, 3, 0, concave=False))
        broken = replace(cert, mu=(Fraction(-1, 3),) + cert.mu[1:])
        rows = dual_slacks(broken, 3, 0, concave=False)
        assert "mu_0" in [row.index for row in rows if not row.satisfied]
        assert [row.index for row in rows if row.family == SIGNS][0] == "sigma_0"

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            verify_dual(concave_dual_certificate(3, 1), 4, 1, concave=True)

    def test_dual_objective_adds_the_welfare_multipliers(self):
        """Welfare rows are <= 1 in a minimization, so their multipliers count with a plus sign."""
        cert = general_dual_certificate(3, 0)
        welfare = (Fraction(-1, 5), Fraction(0), Fraction(-1, 7))
        shifted = replace(cert, sigma=welfare + cert.sigma[-1:])
        assert dual_objective(shifted) == cert.sigma[-1] - Fraction(1, 5) - Fraction(1, 7)
        assert dual_objective(cert) == cert.sigma[-1]

    def test_certificate_serialization(self):
        data = general_dual_certificate(2, 0).to_dict()
        assert data["sigma"] == ["0", "0", "1/2"]
        assert data["mu"] == ["1/2", "0"]


class TestGeneralBound:
    """The general-valuation LP bottoms out at 1/T, attained by the tight instance."""

    @pytest.mark.parametrize("T,k", _grid(6))
    def test_lp_optimum_is_one_over_T(self, T, k):
        assert lp_optimum(T, k, concave=False).optimal_value == poa_bound_general(T)

    @pytest.mark.slow
    def test_lp_optimum_full_grid(self):
        for T in range(1, 26):
            for k in range(T):
                assert lp_optimum(T, k, concave=False).optimal_value == Fraction(1, T), (T, k)

    @pytest.mark.parametrize("T", range(1, 8))
    def test_tight_instance_is_optimal_for_every_endpoint(self, T):
        point = primal_point_from_instance(tight_general(T))
        for k in range(T):
            lp = build_primal(T, k, concave=False)
            assert lp.is_feasible(point)
            assert weak_duality_gap(lp, point, general_dual_certificate(T, k)) == 0


class TestAsymptoticBound:
    """The minimum over k approaches 1 - 1/e from above."""

    @pytest.mark.parametrize("T", list(range(1, 60)) + [97, 128])
    def test_bisection_matches_enumeration(self, T):
        assert poa_bound_concave_min(T) == poa_bound_concave_min_by_enumeration(T)

    def test_never_below_one_minus_inv_e(self):
        lower = one_minus_inv_e_lower()
        for T in range(1, 201):
            assert poa_bound_concave_min(T)[0] >= lower, T

    @pytest.mark.slow
    def test_never_below_one_minus_inv_e_up_to_2000(self):
        lower = one_minus_inv_e_lower()
        for T in range(1, 2001):
            assert poa_bound_concave_min(T)[0] >= lower, T

    def test_thousand_items(self):
        value, argmin = poa_bound_concave_min(1000)
        assert abs(argmin - 367) <= 5
        assert one_minus_inv_e_lower() <= value <= one_minus_inv_e_upper() + Fraction(1, 100)
