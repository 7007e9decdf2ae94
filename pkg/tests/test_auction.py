"""Tests for valuations, instances and welfare."""

from fractions import Fraction

import pytest

from seqauction_poa.auction import (
    ROOT,
    Allocation,
    AuctionInstance,
    IncrementalValuation,
    Node,
    all_nodes,
    dump_instance,
    efficiency,
    load_instance,
    opt_welfare,
    social_welfare,
    validate_instance,
)
from seqauction_poa.instances import example_1


class TestNode:
    """Test lattice navigation."""

    def test_child_and_remaining(self):
        node = Node(1, 0)
        assert node.child(1) == Node(2, 0)
        assert node.child(2) == Node(1, 1)
        assert node.remaining(3) == 2
        assert node.won(1) == 1 and node.won(2) == 0
        assert node.key() == "1,0"

    def test_terminal(self):
        assert Node(2, 1).is_terminal(3)
        assert not Node(1, 1).is_terminal(3)

    def test_all_nodes_visits_children_first(self):
        nodes = list(all_nodes(3))
        assert len(nodes) == 10
        assert nodes[-1] == ROOT
        position = {node: i for i, node in enumerate(nodes)}
        for node in nodes:
            if not node.is_terminal(3):
                assert position[node.child(1)] < position[node]
                assert position[node.child(2)] < position[node]

    def test_allocation_node(self):
        assert Allocation(1).node(3) == Node(1, 2)


class TestIncrementalValuation:
    """Test incremental and cumulative values."""

    def test_cumulative(self):
        valuation = IncrementalValuation((3, "1/2", 0))
        assert valuation.cumulative(0) == 0
        assert valuation.cumulative(2) == Fraction(7, 2)
        assert valuation.prefix_sums() == (0, 3, Fraction(7, 2), Fraction(7, 2))

    def test_one_based_index(self):
        valuation = IncrementalValuation((5, 4))
        assert valuation.v(1) == 5
        with pytest.raises(ValueError):
            valuation.v(0)
        with pytest.raises(ValueError):
            valuation.v(3)
        with pytest.raises(ValueError):
            valuation.cumulative(3)

    def test_concavity(self):
        assert IncrementalValuation((3, 3, 1)).is_concave
        assert not IncrementalValuation((1, 2)).is_concave

    def test_floats_are_rejected(self):
        with pytest.raises(ValueError):
            IncrementalValuation((0.5,))


class TestAuctionInstance:
    """Test the instance JSON contract and validation."""

    def test_round_trip_through_file(self, tmp_path):
        inst = AuctionInstance.from_values(["1/3", 2], [0, "5/7"])
        path = str(tmp_path / "inst.json")
        dump_instance(inst, path)
        assert load_instance(path) == inst

    def test_to_dict_uses_exact_strings(self):
        assert example_1().to_dict() == {"T": 2, "v1": ["10", "10"], "v2": ["5", "0"]}

    def test_from_dict_rejects_missing_keys(self):
        with pytest.raises(ValueError, match="v2"):
            AuctionInstance.from_dict({"T": 1, "v1": [1]})

    def test_from_dict_rejects_bad_rationals(self):
        with pytest.raises(ValueError):
            AuctionInstance.from_dict({"T": 1, "v1": ["1/0"], "v2": [1]})

    def test_validation_reports_every_problem(self):
        inst = AuctionInstance.from_dict({"T": 2, "v1": [1], "v2": [1, -1]})
        report = validate_instance(inst)
        assert not report.valid
        assert len(report.violations) == 2
        assert report.to_dict()["valid"] is False

    def test_validation_flags_concavity(self):
        report = validate_instance(AuctionInstance.from_values([2, 1], [1, 2]))
        assert report.valid
        assert report.concave == (True, False)

    def test_zero_items_is_invalid(self):
        report = validate_instance(AuctionInstance.from_dict({"T": 0, "v1": [], "v2": []}))
        assert not report.valid

    def test_scaled_and_normalized(self):
        inst = example_1()
        assert inst.scaled(Fraction(1, 5)).valuation_1.values == (2, 2)
        assert opt_welfare(inst.normalized(), ROOT)[0] == 1
        with pytest.raises(ValueError):
            inst.scaled(0)


class TestWelfare:
    """Test welfare, optimum and efficiency."""

    def test_social_welfare_example(self):
        inst = example_1()
        assert [social_welfare(inst, ROOT, k) for k in range(3)] == [5, 15, 20]
        assert social_welfare(inst, Node(0, 1), 1) == 10

    def test_opt_welfare_returns_every_maximizer(self):
        inst = AuctionInstance.from_values([1, 1], [1, 1])
        best, argmax = opt_welfare(inst, ROOT)
        assert best == 2
        assert argmax == frozenset({0, 1, 2})

    def test_efficiency(self):
        inst = example_1()
        assert efficiency(inst, ROOT, Allocation(1)) == Fraction(3, 4)
        assert efficiency(inst, ROOT, Allocation(2)) == 1

    def test_efficiency_is_one_when_nothing_is_valued(self):
        inst = AuctionInstance.from_values([0, 0], [0, 0])
        assert efficiency(inst, ROOT, Allocation(0)) == 1

    def test_terminal_node_efficiency(self):
        assert efficiency(example_1(), Node(1, 1), Allocation(1)) == 1

    def test_unreachable_endpoint(self):
        with pytest.raises(ValueError):
            efficiency(example_1(), Node(1, 0), Allocation(0))

    def test_out_of_range(self):
        inst = example_1()
        with pytest.raises(ValueError):
            social_welfare(inst, ROOT, 3)
        with pytest.raises(ValueError):
            opt_welfare(inst, Node(2, 1))
