"""Tests for the named instance families."""

from fractions import Fraction

import pytest

from seqauction_poa.auction import validate_instance
from seqauction_poa.config import GRID_DENOMINATOR, GRID_NUMERATOR_MAX
from seqauction_poa.instances import (
    FAMILIES,
    InstanceFamily,
    all_zero,
    example_1,
    random_concave,
    random_general,
    tight_concave,
    tight_general,
)


class TestTightInstances:
    """Test the closed-form tight instances."""

    def test_tight_concave_values(self):
        inst = tight_concave(3, 1)
        assert inst.valuation_1.values == (1, 1, 1)
        assert inst.valuation_2.values == (Fraction(2, 3), Fraction(1, 2), 0)
        assert inst.valuation_1.is_concave and inst.valuation_2.is_concave

    def test_tight_concave_k_zero_has_identical_buyers(self):
        inst = tight_concave(4, 0)
        assert inst.valuation_1 == inst.valuation_2

    @pytest.mark.parametrize("T,k", [(3, 3), (3, -1), (0, 0)])
    def test_tight_concave_range(self, T, k):
        with pytest.raises(ValueError):
            tight_concave(T, k)

    def test_tight_general_values(self):
        inst = tight_general(3)
        assert inst.valuation_1.values == (0, 0, 1)
        assert inst.valuation_2.values == (Fraction(1, 3), 0, 0)
        assert tight_general(1).valuation_1 == tight_general(1).valuation_2
        with pytest.raises(ValueError):
            tight_general(0)

    def test_example_and_zero(self):
        assert example_1().items == 2
        assert all_zero(3).valuation_1.values == (0, 0, 0)


class TestRandomInstances:
    """Test the seeded random families."""

    def test_deterministic_per_seed(self):
        assert random_concave(6, 11) == random_concave(6, 11)
        assert random_general(6, 11) == random_general(6, 11)

    def test_values_lie_on_the_grid(self):
        inst = random_general(8, 3)
        for value in inst.valuation_1.values + inst.valuation_2.values:
            assert 0 <= value <= Fraction(GRID_NUMERATOR_MAX, GRID_DENOMINATOR)
            assert (value * GRID_DENOMINATOR).denominator == 1

    def test_concave_family_is_concave(self):
        for seed in range(20):
            inst = random_concave(7, seed)
            assert validate_instance(inst).concave == (True, True)

    def test_scale(self):
        base = random_general(4, 2)
        scaled = random_general(4, 2, scale="3/2")
        assert scaled == base.scaled(Fraction(3, 2))
        with pytest.raises(ValueError):
            random_general(4, 2, scale="-1")

    def test_needs_items(self):
        with pytest.raises(ValueError):
            random_concave(0, 1)


class TestInstanceFamily:
    """Test the registry used by the CLI."""

    def test_registry_names(self):
        assert sorted(FAMILIES) == [
            "example1",
            "random-concave",
            "random-general",
            "tight-concave",
            "tight-general",
        ]

    def test_build(self):
        assert InstanceFamily("tight-concave", T=3, k=1).build() == tight_concave(3, 1)
        assert InstanceFamily("random-general", T=5, seed=4).build() == random_general(5, 4)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="Unknown family"):
            InstanceFamily("nope").build()

    def test_describe(self):
        assert InstanceFamily("example1").describe() == {"family": "example1"}
        assert InstanceFamily("tight-concave", T=4, k=2).describe() == {
            "family": "tight-concave",
            "T": 4,
            "k": 2,
        }
        assert InstanceFamily("random-concave", T=3, seed=9).describe() == {
            "family": "random-concave",
            "T": 3,
            "seed": 9,
        }
