"""Exact polynomial arithmetic over Q and the elimination toolkit."""

from fractions import Fraction

from .algebra import (binary_form_resultant, content, gcd, is_squarefree,
                      normalize_primitive, pairwise_coprime_refine, resultant,
                      squarefree_factors, squarefree_primitive_part,
                      sylvester_matrix, univariate_coeffs)
from .poly import (NEG_INF, HomogPoly, Poly, PolyError, dehomogenize,
                   format_poly, homogenize, parse_poly, poly_vars)

Rational = Fraction


def arith(p: Poly, q: Poly, op: str) -> Poly:
    """``op`` is one of ``"add"``, ``"sub"``, ``"mul"``."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise PolyError(f"unknown operation {op!r}")


def partial_derivative(p: Poly, var: str) -> Poly:
    return p.diff(var)


def top_form(p: Poly) -> Poly:
    return p.top_form()


def evaluate(p: Poly, point, mode: str = "exact"):
    return p.eval(point, mode)


__all__ = [
    "NEG_INF", "HomogPoly", "Poly", "PolyError", "Rational", "arith",
    "binary_form_resultant", "content", "dehomogenize", "evaluate",
    "format_poly", "gcd", "homogenize", "is_squarefree", "normalize_primitive",
    "pairwise_coprime_refine", "parse_poly", "partial_derivative", "poly_vars",
    "resultant", "squarefree_factors", "squarefree_primitive_part",
    "sylvester_matrix", "top_form", "univariate_coeffs",
]
