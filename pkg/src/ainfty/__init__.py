"""Exact brace calculus and minimal A-infinity deformations of graded algebras."""

from .series import Parameter, ParameterContext, MultiSeries
from .spaces import (AtomBasis, BasisIndex, Component, GradedElement,
                     GradedSpace, MonomialBasis, koszul_exponent, koszul_sign)
from .operators import (MultiOperator, op_add, op_at_zero, op_brace,
                        op_bracket, op_compose, op_dump, op_partial, op_scale,
                        op_slice, op_sum, verify_prejacobi)
from .report import Report

__all__ = [
    "Parameter", "ParameterContext", "MultiSeries",
    "AtomBasis", "BasisIndex", "Component", "GradedElement", "GradedSpace",
    "MonomialBasis", "koszul_exponent", "koszul_sign",
    "MultiOperator", "op_add", "op_at_zero", "op_brace", "op_bracket",
    "op_compose", "op_dump", "op_partial", "op_scale", "op_slice", "op_sum",
    "verify_prejacobi", "Report",
]
