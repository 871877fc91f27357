"""Model checking of first-order and modal properties of Petri net reachability graphs."""

from ._pnmc import (
    DimensionError,
    FragmentError,
    Graph,
    Net,
    ParseError,
    PnmcError,
    PreconditionError,
    ResourceExceeded,
    SemanticError,
    Verdict,
    check,
    classify,
    engine_names,
    explore,
    fixed_formulas,
    is_bounded,
    normalize_formula,
    presburger_decide,
    presburger_eliminate,
    qbf_truth,
    route,
    run_cli,
    to_dot,
)

__all__ = [
    "DimensionError",
    "FragmentError",
    "Graph",
    "Net",
    "ParseError",
    "PnmcError",
    "PreconditionError",
    "ResourceExceeded",
    "SemanticError",
    "Verdict",
    "check",
    "classify",
    "engine_names",
    "explore",
    "fixed_formulas",
    "is_bounded",
    "normalize_formula",
    "presburger_decide",
    "presburger_eliminate",
    "qbf_truth",
    "route",
    "run_cli",
    "to_dot",
]
