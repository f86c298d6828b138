"""pbound: exact Newton-polygon multiplicities, Darboux polynomials and
degree bounds for planar polynomial ODE systems dw/dz = P(z,w)/Q(z,w).

Everything is exact: rationals, univariate polynomials over towers of
algebraic extensions (with dynamic-evaluation splitting), and sparse
bivariate polynomials with ramified z-exponents.  All values are immutable
and all operations are pure functions, so concurrent use is safe and results
are bit-for-bit reproducible.
"""

from .exact import (
    Q,
    Tower,
    QQ_TOWER,
    ExtElem,
    UniPoly,
    TowerSplitError,
    adjoin_root,
    try_invert,
    factor_univariate,
    squarefree_and_rational_roots,
)
from .polyode import (
    BiPoly,
    OdeSystem,
    PuiseuxBranch,
    coeff_profile,
    make_system,
    residual_valuation,
    substitute_branch,
    transform_point,
)
from .newton import (
    edge_char_poly,
    lower_hull,
    support_points,
    vertex_critical_check,
)
from .branching import (
    Caps,
    MultiplicityResult,
    closure_check,
    expand_branches,
    multiplicity_at,
    resolve_resonance,
)
from .bounds import (
    BoundReport,
    axis_multiplicity_bound,
    axis_singular_points,
    invariant_line_bound,
    line_transform,
)
from .darboux import (
    DarbouxCertificate,
    detect_invariant_lines,
    search_darboux,
    strictness_check,
    verify_darboux,
)
from .lotka import LvParams, apply_symmetry, classify, genericity_check
from .sysparse import emit_report, parse_system, print_system

__version__ = "0.1.0"

__all__ = [
    "Q",
    "Tower",
    "QQ_TOWER",
    "ExtElem",
    "UniPoly",
    "TowerSplitError",
    "adjoin_root",
    "try_invert",
    "factor_univariate",
    "squarefree_and_rational_roots",
    "BiPoly",
    "OdeSystem",
    "PuiseuxBranch",
    "coeff_profile",
    "make_system",
    "residual_valuation",
    "substitute_branch",
    "transform_point",
    "edge_char_poly",
    "lower_hull",
    "support_points",
    "vertex_critical_check",
    "Caps",
    "MultiplicityResult",
    "closure_check",
    "expand_branches",
    "multiplicity_at",
    "resolve_resonance",
    "BoundReport",
    "axis_multiplicity_bound",
    "axis_singular_points",
    "invariant_line_bound",
    "line_transform",
    "DarbouxCertificate",
    "detect_invariant_lines",
    "search_darboux",
    "strictness_check",
    "verify_darboux",
    "LvParams",
    "apply_symmetry",
    "classify",
    "genericity_check",
    "emit_report",
    "parse_system",
    "print_system",
    "__version__",
]
