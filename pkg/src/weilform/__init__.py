"""Exact computation with finite quadratic modules, Weil representations and
Jacobi forms of critical weight."""

from .errors import BudgetExceeded, ConsistencyError, ValidationError, WeilformError
from .exactnum import CyclotomicNumber, e_of, snap_root_of_unity
from .fqm import D, L, XY3, Fqm, Hyp, fqm_from_matrix, neg, orth_sum
from .weilrep import GenRep, eps_char, ind_gamma0, invariants, tensor, weil_rep

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "ConsistencyError", "ValidationError", "WeilformError",
    "CyclotomicNumber", "e_of", "snap_root_of_unity",
    "D", "L", "XY3", "Fqm", "Hyp", "fqm_from_matrix", "neg", "orth_sum",
    "GenRep", "eps_char", "ind_gamma0", "invariants", "tensor", "weil_rep",
]
