"""Numerical toolkit for tangential Lipschitz gain of holomorphic functions."""
from .disc import DiscContext, estimate_k0, r_of_t, s_of_t
from .expr import evaluate, parse, unparse, wirtinger_derive
from .lipschitz import make_completion, make_conjugate_completion, verify_main_theorem
from .poly import to_poly
from .registry import builtin_domains, get_domain, load_registry
from .typeoracle import compose_order, line_type, line_type_sweep, parse_curve

__version__ = "0.1.0"

__all__ = [
    "DiscContext", "estimate_k0", "r_of_t", "s_of_t", "evaluate", "parse", "unparse", "wirtinger_derive",
    "make_completion", "make_conjugate_completion", "verify_main_theorem", "to_poly", "builtin_domains",
    "get_domain", "load_registry", "compose_order", "line_type", "line_type_sweep", "parse_curve",
]
