"""
Linear programs that lower-bound the efficiency of equilibrium paths, their closed-form dual
certificates, and the resulting price-of-anarchy formulas.

Primal variables are v1(1..T) followed by v2(1..T). The primal is normalized so that
buyer 1 taking every item is optimal with welfare 1, and is conditioned on an equilibrium
path ending at (k, T-k).

Dual sign convention: sigma_l (l < T) multiplies a `<= 1` welfare row of a minimization, so
sigma_l <= 0 and it enters the dual objective with coefficient +1. The certificates below
have sigma_l = 0 for l < T, so their objective is sigma_T either way.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from seqauction_poa.auction import ROOT, AuctionInstance, opt_welfare
from seqauction_poa.checks import CheckReport, Witness
from seqauction_poa.rational_utils import format_rational, harmonic
from seqauction_poa.simplex import LinearProgram, LpSolveResult, Relation, solve_exact

NORMALIZATION = "normalization"
WELFARE = "welfare"
VALID = "valid"
CONCAVITY = "concavity"

# Dual row families, named after the primal variable they price.
PRICE_V1_WON = "cons:1"  # v1(i), i <= k
PRICE_V1_LOST = "cons:2"  # v1(i), i > k
PRICE_V2_WON = "cons:3"  # v2(i), i <= T-k
PRICE_V2_LOST = "cons:4"  # v2(i), i > T-k
SIGNS = "cons:5"


def _check_range(T: int, k: int, allow_all: bool = False) -> None:
    if T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    upper = T if allow_all else T - 1
    if not 0 <= k <= upper:
        raise ValueError(f"k = {k} outside 0..{upper} for T = {T}")


def variable_names(T: int) -> List[str]:
    return [f"v1({j})" for j in range(1, T + 1)] + [f"v2({j})" for j in range(1, T + 1)]


def build_primal(T: int, k: int, concave: bool) -> LinearProgram:
    """
    The efficiency LP conditioned on an equilibrium endpoint (k, T-k), 0 <= k < T.

        minimize    sum_{j<=k} v1(j) + sum_{j<=T-k} v2(j)
        subject to  sum_j v1(j) = 1
                    sum_{j<=l} v1(j) + sum_{j<=T-l} v2(j) <= 1          0 <= l < T
                    sum_{i=l+1}^{T-k} (T-i+1) v2(i)
                      - sum_{i=k+1}^{T-l} (T-i-l+1) v1(i) >= 0          0 <= l < T-k
                    v_i(j+1) - v_i(j) <= 0                              if concave
                    v >= 0

    Raises:
        ValueError: If k is not in [0, T).
    """
    _check_range(T, k)
    size = 2 * T

    def v1(j: int) -> int:
        return j - 1

    def v2(j: int) -> int:
        return T + j - 1

    objective = [Fraction(0)] * size
    for j in range(1, k + 1):
        objective[v1(j)] = Fraction(1)
    for j in range(1, T - k + 1):
        objective[v2(j)] = Fraction(1)
    lp = LinearProgram(variable_names(T), objective)

    row = [0] * size
    for j in range(1, T + 1):
        row[v1(j)] = 1
    lp.add_constraint(row, Relation.EQ, 1, NORMALIZATION)

    for l in range(T):
        row = [0] * size
        for j in range(1, l + 1):
            row[v1(j)] = 1
        for j in range(1, T - l + 1):
            row[v2(j)] = 1
        lp.add_constraint(row, Relation.LE, 1, f"{WELFARE}[l={l}]")

    for ell in range(T - k):
        row = [0] * size
        for i in range(ell + 1, T - k + 1):
            row[v2(i)] = T - i + 1
        for i in range(k + 1, T - ell + 1):
            row[v1(i)] = -(T - i - ell + 1)
        lp.add_constraint(row, Relation.GE, 0, f"{VALID}[ell={ell}]")

    if concave:
        for buyer, index in ((1, v1), (2, v2)):
            for j in range(1, T):
                row = [0] * size
                row[index(j + 1)] = 1
                row[index(j)] = -1
                lp.add_constraint(row, Relation.LE, 0, f"{CONCAVITY}[buyer={buyer},j={j}]")
    return lp


def lp_optimum(T: int, k: int, concave: bool) -> LpSolveResult:
    return solve_exact(build_primal(T, k, concave))


@dataclass(frozen=True)
class DualCertificate:
    """
    A dual solution for the (T, k) efficiency LP.

    Attributes:
        T, k (int): Problem size and endpoint.
        sigma (Tuple[Fraction, ...]): sigma_0..sigma_T; sigma_T prices the normalization row.
        kappa1, kappa2 (Tuple[Fraction, ...]): kappa_{i,0..T} for the concavity rows, with
            kappa_{i,0} = kappa_{i,T} = 0.
        mu (Tuple[Fraction, ...]): mu_0..mu_{T-k-1} for the valid inequalities.
    """

    T: int
    k: int
    sigma: Tuple[Fraction, ...]
    kappa1: Tuple[Fraction, ...]
    kappa2: Tuple[Fraction, ...]
    mu: Tuple[Fraction, ...]

    def kappa(self, buyer: int) -> Tuple[Fraction, ...]:
        return self.kappa1 if buyer == 1 else self.kappa2

    def with_sigma_T(self, value: Fraction) -> "DualCertificate":
        sigma = self.sigma[:-1] + (value,)
        return DualCertificate(self.T, self.k, sigma, self.kappa1, self.kappa2, self.mu)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "k": self.k,
            "sigma": [format_rational(x) for x in self.sigma],
            "kappa1": [format_rational(x) for x in self.kappa1],
            "kappa2": [format_rational(x) for x in self.kappa2],
            "mu": [format_rational(x) for x in self.mu],
        }


def poa_bound_concave(T: int, k: int) -> Fraction:
    """(1/T) (k + sum_{j=1}^{T-k} j / (k + j)); equals 1 at k = T."""
    _check_range(T, k, allow_all=True)
    return (k + sum((Fraction(j, k + j) for j in range(1, T - k + 1)), Fraction(0))) / T


def poa_bound_general(T: int) -> Fraction:
    if T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    return Fraction(1, T)


def _kappa1_low(T: int, k: int, sigma_T: Fraction, i: int) -> Fraction:
    return i * (sigma_T - 1)


def _kappa1_high(T: int, k: int, sigma_T: Fraction, i: int) -> Fraction:
    tail = sum((Fraction(T - i - j, T - j) for j in range(T - i)), Fraction(0))
    return -(T - i) * sigma_T + tail


def concave_dual_certificate(T: int, k: int) -> DualCertificate:
    """
    The closed-form dual solution of the concave LP:

        sigma_T = (1/T)(k + sum_{j=1}^{T-k} j/(k+j)),  mu_0 = 1/T,
        mu_l = 1/(T-l) - 1/(T-l+1) for 0 < l < T-k,
        kappa_{1,i} = i (sigma_T - 1)                                    0 < i <= k
        kappa_{1,i} = -(T-i) sigma_T + sum_{j=0}^{T-i-1} (T-i-j)/(T-j)   k <= i <= T-1

    and zero elsewhere.

    Raises:
        ValueError: If k is not in [0, T).
        RuntimeError: If the two expressions for kappa_{1,k} disagree.
    """
    _check_range(T, k)
    sigma_T = poa_bound_concave(T, k)
    mu = [Fraction(1, T)] + [Fraction(1, T - l) - Fraction(1, T - l + 1) for l in range(1, T - k)]
    kappa1 = [Fraction(0)] * (T + 1)
    for i in range(1, T):
        if i <= k:
            kappa1[i] = _kappa1_low(T, k, sigma_T, i)
        else:
            kappa1[i] = _kappa1_high(T, k, sigma_T, i)
    if _kappa1_low(T, k, sigma_T, k) != _kappa1_high(T, k, sigma_T, k):
        raise RuntimeError(f"kappa_(1,{k}) branches disagree for T = {T}")
    sigma = [Fraction(0)] * T + [sigma_T]
    return DualCertificate(T, k, tuple(sigma), tuple(kappa1), (Fraction(0),) * (T + 1), tuple(mu))


def general_dual_certificate(T: int, k: int) -> DualCertificate:
    """sigma_T = mu_0 = 1/T and every other variable zero."""
    _check_range(T, k)
    zeros = (Fraction(0),) * (T + 1)
    sigma = (Fraction(0),) * T + (Fraction(1, T),)
    mu = (Fraction(1, T),) + (Fraction(0),) * (T - k - 1)
    return DualCertificate(T, k, sigma, zeros, zeros, mu)


def dual_objective(cert: DualCertificate, T: Optional[int] = None) -> Fraction:
    """sigma_T + sum_{l<T} sigma_l: the normalization row has rhs 1, each welfare row rhs 1."""
    if T is not None and T != cert.T:
        raise ValueError(f"Certificate is for T = {cert.T}, not {T}")
    return sum(cert.sigma, Fraction(0))


@dataclass(frozen=True)
class DualRow:
    """One dual constraint evaluated at a certificate; slack < 0 means violated."""

    family: str
    index: str
    lhs: Fraction
    relation: Relation
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        if self.relation is Relation.LE:
            return self.rhs - self.lhs
        if self.relation is Relation.GE:
            return self.lhs - self.rhs
        return -abs(self.lhs - self.rhs)

    @property
    def tight(self) -> bool:
        return self.lhs == self.rhs

    @property
    def satisfied(self) -> bool:
        return self.slack >= 0


def _check_dimensions(cert: DualCertificate, T: int, k: int) -> None:
    expected = (T + 1, T + 1, T + 1, T - k)
    actual = (len(cert.sigma), len(cert.kappa1), len(cert.kappa2), len(cert.mu))
    if (cert.T, cert.k) != (T, k) or actual != expected:
        raise ValueError(
            f"Certificate dimensions (T={cert.T}, k={cert.k}, sizes {actual}) "
            f"do not match T={T}, k={k} (sizes {expected})"
        )


def dual_slacks(cert: DualCertificate, T: int, k: int, concave: bool) -> List[DualRow]:
    """
    Evaluates every constraint of the dual LP at `cert`, in family order cons:1 .. cons:5.

    The general dual has no concavity multipliers; there the sign rows pin every kappa to 0.

    Raises:
        ValueError: If the certificate's dimensions do not match (T, k).
    """
    _check_range(T, k)
    _check_dimensions(cert, T, k)
    sigma, mu = cert.sigma, cert.mu
    k1, k2 = cert.kappa1, cert.kappa2
    zero, one = Fraction(0), Fraction(1)
    rows: List[DualRow] = []

    # Suffix sums sum_{l=i}^T sigma_l and prefix sums sum_{l=0}^{i} sigma_l.
    suffix = [zero] * (T + 2)
    for l in range(T, -1, -1):
        suffix[l] = suffix[l + 1] + sigma[l]
    prefix = []
    running = zero
    for l in range(T + 1):
        running += sigma[l]
        prefix.append(running)

    for i in range(1, k + 1):
        lhs = suffix[i] - k1[i] + k1[i - 1]
        rows.append(DualRow(PRICE_V1_WON, f"i={i}", lhs, Relation.LE, one))
    for i in range(k + 1, T + 1):
        valid = sum(((T - i - ell + 1) * mu[ell] for ell in range(T - i + 1)), zero)
        lhs = suffix[i] - k1[i] + k1[i - 1] - valid
        rows.append(DualRow(PRICE_V1_LOST, f"i={i}", lhs, Relation.LE, zero))
    for i in range(1, T - k + 1):
        valid = (T - i + 1) * sum(mu[:i], zero)
        lhs = prefix[T - i] - k2[i] + k2[i - 1] + valid
        rows.append(DualRow(PRICE_V2_WON, f"i={i}", lhs, Relation.LE, one))
    for i in range(T - k + 1, T + 1):
        lhs = prefix[T - i] - k2[i] + k2[i - 1]
        rows.append(DualRow(PRICE_V2_LOST, f"i={i}", lhs, Relation.LE, zero))

    for l in range(T):
        rows.append(DualRow(SIGNS, f"sigma_{l}", sigma[l], Relation.LE, zero))
    for buyer, kappa in ((1, k1), (2, k2)):
        for j in range(T + 1):
            boundary = j in (0, T) or not concave
            relation = Relation.EQ if boundary else Relation.LE
            rows.append(DualRow(SIGNS, f"kappa_{buyer},{j}", kappa[j], relation, zero))
    for ell, value in enumerate(mu):
        rows.append(DualRow(SIGNS, f"mu_{ell}", value, Relation.GE, zero))
    return rows


def verify_dual(
    cert: DualCertificate,
    T: int,
    k: int,
    concave: bool,
    require_tight: Optional[bool] = None,
) -> CheckReport:
    """
    Checks dual feasibility of a certificate, optionally requiring rows cons:1..cons:4 to be
    tight (the default for the concave dual).

    Raises:
        ValueError: If the certificate's dimensions do not match (T, k).
    """
    if require_tight is None:
        require_tight = concave
    witnesses = []
    for row in dual_slacks(cert, T, k, concave):
        where = f"{row.family} {row.index}"
        if not row.satisfied:
            witnesses.append(Witness(where, row.rhs, row.lhs, f"violates {row.relation.value}"))
        elif require_tight and row.family != SIGNS and not row.tight:
            witnesses.append(Witness(where, row.rhs, row.lhs, "not tight"))
    name = "concave_dual_feasibility" if concave else "general_dual_feasibility"
    return CheckReport.from_witnesses(name, witnesses)


def poa_bound_concave_min(T: int) -> Tuple[Fraction, int]:
    """
    min_{0<=k<=T} poa_bound_concave(T, k) and its smallest argmin.

    poa_bound_concave(T, k) = 1 - (k/T)(H_T - H_k), and k (H_T - H_k) grows from k to k+1
    exactly when H_T - H_k > 1. That difference decreases in k, so the minimum sits at the
    first k with H_T - H_k <= 1, found by bisection on exact harmonic numbers.
    """
    if T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    total = harmonic(T)
    lo, hi = 0, T
    while lo < hi:
        mid = (lo + hi) // 2
        if total - harmonic(mid) <= 1:
            hi = mid
        else:
            lo = mid + 1
    return 1 - Fraction(lo, T) * (total - harmonic(lo)), lo


def poa_bound_concave_min_by_enumeration(T: int) -> Tuple[Fraction, int]:
    """Reference version of `poa_bound_concave_min` that evaluates every k directly."""
    values = [poa_bound_concave(T, k) for k in range(T + 1)]
    best = min(values)
    return best, values.index(best)


def primal_point_from_instance(inst: AuctionInstance) -> List[Fraction]:
    """The instance's values, scaled so opt(0) = 1, as a primal point (v1..., v2...)."""
    best, _ = opt_welfare(inst, ROOT)
    scale = Fraction(1) if best == 0 else 1 / best
    return [v * scale for v in inst.valuation_1.values] + [
        v * scale for v in inst.valuation_2.values
    ]


def concave_bound_row(
    T: int, k: int, with_lp: bool = False, tight_efficiency: Optional[Fraction] = None
) -> Dict[str, Any]:
    """One (T, k) row of the concave bound table."""
    return {
        "T": T,
        "k": k,
        "formula": poa_bound_concave(T, k),
        "lp_opt": lp_optimum(T, k, concave=True).optimal_value if with_lp else None,
        "dual_obj": dual_objective(concave_dual_certificate(T, k)),
        "tight_instance_eff": tight_efficiency,
    }


def weak_duality_gap(
    lp: LinearProgram, point: Sequence[Fraction], cert: DualCertificate
) -> Fraction:
    """Primal objective at `point` minus the certificate's dual objective (>= 0 when feasible)."""
    return lp.evaluate(point) - dual_objective(cert)
