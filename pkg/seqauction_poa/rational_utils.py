import re
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Union

from seqauction_poa.config import DECIMAL_PLACES

RationalLike = Union[int, str, Fraction]

_RATIONAL_PATTERN = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")

# Number of alternating-series terms used for the directed bounds on 1/e.
# The truncation error is below 1/(INV_E_TERMS + 1)!, far under anything the bounds are compared to.
INV_E_TERMS = 30


def parse_rational(value: RationalLike) -> Fraction:
    """
    Parses an exact rational from an int, a Fraction, or a string "p" / "p/q" with q > 0.

    Floats are rejected: every quantity in this package must be exact.

    Args:
        value: The value to parse.

    Returns:
        Fraction: The parsed rational in lowest terms.

    Raises:
        ValueError: If the value is a float, a bool, or a malformed string, or if q == 0.
    """
    if isinstance(value, bool):
        raise ValueError(f"Expected a rational, got boolean {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL_PATTERN.match(value)
        if not match:
            raise ValueError(f"Malformed rational {value!r}; expected an integer or 'p/q'")
        numerator = int(match.group(1))
        denominator = int(match.group(2)) if match.group(2) is not None else 1
        if denominator == 0:
            raise ValueError(f"Malformed rational {value!r}; denominator must be positive")
        return Fraction(numerator, denominator)
    raise ValueError(f"Expected an int or a 'p/q' string, got {type(value).__name__} {value!r}")


def format_rational(value: Fraction) -> str:
    """Formats a rational as "p/q", or "p" when it is an integer."""
    return str(Fraction(value))


def to_decimal(value: Fraction, places: int = DECIMAL_PLACES) -> str:
    """
    Rounds a rational to a fixed number of decimal places (half-even).

    The result is an approximation for human readers only.
    """
    value = Fraction(value)
    with localcontext() as ctx:
        # Enough digits for the integer part plus the requested places.
        ctx.prec = max(28, len(str(abs(value.numerator) // value.denominator)) + places + 5)
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        rounded = quotient.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
        return f"{rounded:f}"


def rational_payload(value: Fraction, places: int = DECIMAL_PLACES) -> Dict[str, str]:
    """Serializes a rational as its exact string plus an approximate decimal."""
    return {"exact": format_rational(value), "approx": to_decimal(value, places)}


def inverse_e_partial_sum(terms: int) -> Fraction:
    """Returns sum_{n=0}^{terms} (-1)^n / n!, a partial sum of the series for 1/e."""
    total = Fraction(0)
    factorial = 1
    for n in range(terms + 1):
        if n > 0:
            factorial *= n
        total += Fraction((-1) ** n, factorial)
    return total


def one_minus_inv_e_lower() -> Fraction:
    """
    A rational strictly below 1 - 1/e.

    Partial sums of an alternating series with decreasing terms bracket the limit: an even
    number of terms overshoots 1/e, so one minus it undershoots 1 - 1/e.
    """
    terms = INV_E_TERMS if INV_E_TERMS % 2 == 0 else INV_E_TERMS + 1
    return 1 - inverse_e_partial_sum(terms)


def one_minus_inv_e_upper() -> Fraction:
    """A rational strictly above 1 - 1/e (odd partial sum of the series for 1/e)."""
    terms = INV_E_TERMS + 1 if INV_E_TERMS % 2 == 0 else INV_E_TERMS
    return 1 - inverse_e_partial_sum(terms)


_HARMONIC: List[Fraction] = [Fraction(0)]


def harmonic(n: int) -> Fraction:
    """Returns the n-th harmonic number H_n = 1 + 1/2 + ... + 1/n exactly (H_0 = 0)."""
    if n < 0:
        raise ValueError(f"Harmonic number index must be non-negative, got {n}")
    while len(_HARMONIC) <= n:
        _HARMONIC.append(_HARMONIC[-1] + Fraction(1, len(_HARMONIC)))
    return _HARMONIC[n]
