"""Certified computations around uniform growth of finite sets of matrices:
spectral radii and conjugation-minimized norms at real and p-adic places,
proximal normal forms, ping-pong freeness certificates, ball searches, an
SL_2 free-pair pipeline and an SL_2(F_q) girth laboratory."""
from .errors import BudgetError, CertifiedNegative, InputError, UGrowthError
from .linalg import Mat, char_poly, op_norm, spectral_radii
from .pingpong import (
    Collision,
    NoCollisionUpTo,
    PingCertificate,
    TableTennisCertificate,
    certify_ping,
    certify_table_tennis,
    refute_freeness,
)
from .scalars import Place, PPower, RealInterval, ZERO, abs_at_place, quad
from .search import dplus_upper, growth_table
from .setcalc import Budget, MatSet, delta_bounds
from .sl2 import sl2_free_pair, zariski_dense_sl2
from .verify import verify_certificate

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "CertifiedNegative", "InputError", "UGrowthError",
    "Mat", "char_poly", "op_norm", "spectral_radii",
    "Collision", "NoCollisionUpTo", "PingCertificate", "TableTennisCertificate",
    "certify_ping", "certify_table_tennis", "refute_freeness",
    "Place", "PPower", "RealInterval", "ZERO", "abs_at_place", "quad",
    "dplus_upper", "growth_table", "Budget", "MatSet", "delta_bounds",
    "sl2_free_pair", "zariski_dense_sl2", "verify_certificate",
]
