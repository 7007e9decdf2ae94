"""seqauction-poa - Equilibria and efficiency bounds for two-buyer sequential auctions.

Solves the subgame-perfect equilibrium of a sequential second-price auction of T identical
items between two buyers by backward induction, in exact rational arithmetic, and checks the
structural properties of its equilibrium paths. The price-of-anarchy bounds (1 - 1/e for
concave valuations, 1/T in general) are reproduced by an exact simplex solver, by closed-form
dual certificates, and by instances on which they are tight.

Features:
- Exact backward induction with every tie-breaking path and endpoint
- Executable structural checks with concrete witnesses on failure
- Exact two-phase simplex with Bland's rule, plus dual certificate verification
- Tight instance families and seeded random instance generators
- Command-line interface with JSON, CSV and pretty output
"""

__version__ = "0.1.0"
__license__ = "MIT"

from .auction import AuctionInstance, IncrementalValuation, Node, efficiency, opt_welfare
from .checks import CheckReport, run_all_checks
from .equilibrium import EquilibriumSolution, TiePolicy, extract_path, solve
from .lp import concave_dual_certificate, poa_bound_concave, poa_bound_general, verify_dual
from .simplex import LinearProgram, solve_exact

__all__ = [
    "AuctionInstance",
    "IncrementalValuation",
    "Node",
    "efficiency",
    "opt_welfare",
    "CheckReport",
    "run_all_checks",
    "EquilibriumSolution",
    "TiePolicy",
    "extract_path",
    "solve",
    "concave_dual_certificate",
    "poa_bound_concave",
    "poa_bound_general",
    "verify_dual",
    "LinearProgram",
    "solve_exact",
    "__version__",
    "__license__",
]
