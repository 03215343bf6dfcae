"""opcalc: exact operadic homological algebra over Q and F_p."""

from .fields import QQ, GF, parse_field
from .matrix import Matrix, rank, kernel_basis, solve

__all__ = ["QQ", "GF", "parse_field", "Matrix", "rank", "kernel_basis", "solve"]
