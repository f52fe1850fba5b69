"""SL_2(F_q) laboratory: directed Cayley girth, collision depth, expansion."""
from .field import Field, default_modulus, is_irreducible, prime_power
from .group import (
    CSV_HEADER,
    FqContext,
    GirthRecord,
    ball,
    collision_depth,
    directed_girth,
    expansion_ratio,
    generates,
    girth_table,
    min_expansion,
    sl2q_make,
)
from .kernels import BACKEND

__all__ = [
    "Field", "default_modulus", "is_irreducible", "prime_power", "CSV_HEADER",
    "FqContext", "GirthRecord", "ball", "collision_depth", "directed_girth",
    "expansion_ratio", "generates", "girth_table", "min_expansion", "sl2q_make",
    "BACKEND",
]
