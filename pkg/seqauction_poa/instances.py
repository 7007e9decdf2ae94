"""Worked example, tight instances, and seeded random instance families."""

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from seqauction_poa.auction import AuctionInstance
from seqauction_poa.config import GRID_DENOMINATOR, GRID_NUMERATOR_MAX
from seqauction_poa.rational_utils import RationalLike, parse_rational


def example_1() -> AuctionInstance:
    """Two items; buyer 1 values them (10, 10), buyer 2 values them (5, 0)."""
    return AuctionInstance.from_values([10, 10], [5, 0])


def tight_concave(T: int, k: int) -> AuctionInstance:
    """
    Concave instance whose worst equilibrium path ends at (k, T-k):
    v1(j) = 1 and v2(j) = (T-k-j+1)/(T-j+1) for j <= T-k, 0 beyond.

    Raises:
        ValueError: If k is not in [0, T).
    """
    if T < 1 or not 0 <= k < T:
        raise ValueError(f"tight_concave needs 0 <= k < T, got T = {T}, k = {k}")
    v1 = [Fraction(1)] * T
    v2 = [
        Fraction(T - k - j + 1, T - j + 1) if j <= T - k else Fraction(0) for j in range(1, T + 1)
    ]
    return AuctionInstance.from_values(v1, v2)


def tight_general(T: int) -> AuctionInstance:
    """v1 = (0, ..., 0, 1) and v2 = (1/T, 0, ..., 0): one tie at the root costs all but 1/T."""
    if T < 1:
        raise ValueError(f"tight_general needs T >= 1, got {T}")
    v1 = [Fraction(0)] * (T - 1) + [Fraction(1)]
    v2 = [Fraction(1, T)] + [Fraction(0)] * (T - 1)
    return AuctionInstance.from_values(v1, v2)


def all_zero(T: int) -> AuctionInstance:
    return AuctionInstance.from_values([0] * T, [0] * T)


def _grid_draws(rng: random.Random, T: int, scale: Fraction) -> List[Fraction]:
    return [
        Fraction(rng.randint(0, GRID_NUMERATOR_MAX), GRID_DENOMINATOR) * scale for _ in range(T)
    ]


def _scale(scale: Optional[RationalLike]) -> Fraction:
    value = Fraction(1) if scale is None else parse_rational(scale)
    if value <= 0:
        raise ValueError(f"scale must be positive, got {value}")
    return value


def random_concave(T: int, seed: int, scale: Optional[RationalLike] = None) -> AuctionInstance:
    """
    Non-increasing grid values for both buyers (sorted uniform draws), deterministic per seed.

    Values come from {0, 1/D, ..., N/D} * scale with D = GRID_DENOMINATOR, N = GRID_NUMERATOR_MAX.
    """
    if T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    rng = random.Random(seed)
    factor = _scale(scale)
    v1 = sorted(_grid_draws(rng, T, factor), reverse=True)
    v2 = sorted(_grid_draws(rng, T, factor), reverse=True)
    return AuctionInstance.from_values(v1, v2)


def random_general(T: int, seed: int, scale: Optional[RationalLike] = None) -> AuctionInstance:
    """Independent grid values for both buyers, deterministic per seed."""
    if T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    rng = random.Random(seed)
    factor = _scale(scale)
    return AuctionInstance.from_values(_grid_draws(rng, T, factor), _grid_draws(rng, T, factor))


@dataclass(frozen=True)
class InstanceFamily:
    """
    A named generator together with the parameters it is called with.

    Attributes:
        name (str): One of the keys of FAMILIES.
        T (int): Number of items (ignored by example1).
        k (int): Endpoint parameter for tight-concave.
        seed (int): Seed for the random families.
        scale (Optional[str]): Scale for the random families, as a rational string.
    """

    name: str
    T: int = 2
    k: int = 0
    seed: int = 0
    scale: Optional[str] = None

    def build(self) -> AuctionInstance:
        if self.name not in FAMILIES:
            raise ValueError(
                f"Unknown family '{self.name}'. Choose from: {', '.join(sorted(FAMILIES))}"
            )
        return FAMILIES[self.name](self)

    def describe(self) -> Dict[str, Any]:
        """Parameters that matter for this family, echoed in every report."""
        params: Dict[str, Any] = {"family": self.name}
        if self.name != "example1":
            params["T"] = self.T
        if self.name == "tight-concave":
            params["k"] = self.k
        if self.name.startswith("random"):
            params["seed"] = self.seed
            if self.scale is not None:
                params["scale"] = self.scale
        return params


FAMILIES: Dict[str, Callable[[InstanceFamily], AuctionInstance]] = {
    "example1": lambda f: example_1(),
    "tight-concave": lambda f: tight_concave(f.T, f.k),
    "tight-general": lambda f: tight_general(f.T),
    "random-concave": lambda f: random_concave(f.T, f.seed, f.scale),
    "random-general": lambda f: random_general(f.T, f.seed, f.scale),
}
