"""The derived A-infinity structure on Hom(T(V),V) and its cochain identities.

Given a structure map m of total degree 1 with m o m = 0, the operator space
W = Hom(T(V),V) carries a flat A-infinity structure

    M_1(A) = m o A - (-1)^{|A|} A o m,      M_k(A_1,...,A_k) = m{A_1,...,A_k},

and (M o M)(A_1,...,A_n) = (m o m){A_1,...,A_n} = 0.  The checks below verify
this and the cup-product identities exactly at cochain level; no cohomology
quotients are ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from .errors import DegreeError
from .operators import (IndexTuple, MultiOperator, evaluate_on_bank, op_add,
                        op_brace, op_bracket, op_compose, op_scale, op_sum)
from .report import Report


def sign(parity: int) -> int:
    return -1 if parity % 2 else 1


@dataclass
class AInftyStructure:
    """A structure map of total degree 1, with flatness flags."""

    m: MultiOperator
    flat: bool = True
    minimal: bool = False

    def __post_init__(self):
        if self.m.degree != 1:
            raise DegreeError(f"structure map must have total degree 1, got {self.m.degree}")

    def validate(self, tuples: Iterable[IndexTuple]) -> Report:
        return stasheff_check(self.m, tuples)


def stasheff_check(m: MultiOperator, tuples: Iterable[IndexTuple]) -> Report:
    """Residuals of (m o m) on basis tuples; all must vanish exactly."""
    if m.degree != 1:
        raise DegreeError("stasheff_check needs |m| = 1")
    return evaluate_on_bank(op_compose(m, m), tuples, "stasheff")


# -- the derived structure maps -----------------------------------------------


def derived_m1(m: MultiOperator, A: MultiOperator) -> MultiOperator:
    """M_1(A) = m o A - (-1)^{|A|} A o m; the differential on W."""
    return op_add(op_compose(m, A),
                  op_scale(op_compose(A, m), -sign(A.degree)))


def derived_mk(m: MultiOperator, ops: Sequence[MultiOperator]) -> MultiOperator:
    """M_k(A_1,...,A_k) = m{A_1,...,A_k} for k >= 2."""
    if len(ops) < 2:
        raise ValueError("derived_mk is the k >= 2 part; use derived_m1")
    return op_brace(m, ops)


def derived_m(m: MultiOperator, ops: Sequence[MultiOperator]) -> MultiOperator:
    """The full flat family: M_0 = 0, M_1 as above, M_k braces."""
    if len(ops) == 0:
        return MultiOperator.zero(m.space, 1)
    if len(ops) == 1:
        return derived_m1(m, ops[0])
    return op_brace(m, ops)


def derived_m_nonflat(m: MultiOperator, ops: Sequence[MultiOperator]) -> MultiOperator:
    """The non-flat variant M_k = m{A_1,...,A_k} for every k >= 0."""
    return op_brace(m, ops)


def _w_compose(m: MultiOperator, structure, ops: Sequence[MultiOperator]) -> MultiOperator:
    """(M o M)(A_1,...,A_n) expanded with the composition rule on Hom(T(W),W).

    Every M_k has degree 1, so the insertion sign is (-1)^{|A_1|+...+|A_i|}
    for an inner block starting after position i.
    """
    n = len(ops)
    parities = [A.degree % 2 for A in ops]
    prefix = [0]
    for p in parities:
        prefix.append(prefix[-1] + p)
    terms: List[MultiOperator] = []
    for inner_len in range(1, n + 1):
        for i in range(0, n - inner_len + 1):
            inner = structure(m, ops[i:i + inner_len])
            outer_args = list(ops[:i]) + [inner] + list(ops[i + inner_len:])
            term = structure(m, outer_args)
            terms.append(op_scale(term, sign(prefix[i])))
    return op_sum(terms, space=m.space, degree=2 + sum(A.degree for A in ops))


def getzler_residual(m: MultiOperator, ops: Sequence[MultiOperator],
                     nonflat: bool = False) -> MultiOperator:
    structure = derived_m_nonflat if nonflat else derived_m
    res = _w_compose(m, structure, ops)
    if nonflat:
        # the k = 0 inner block contributes m itself in every gap
        n = len(ops)
        parities = [A.degree % 2 for A in ops]
        prefix = [0]
        for p in parities:
            prefix.append(prefix[-1] + p)
        extra = []
        for i in range(0, n + 1):
            outer_args = list(ops[:i]) + [m] + list(ops[i:])
            extra.append(op_scale(op_brace(m, outer_args), sign(prefix[i])))
        res = op_sum([res] + extra)
    return res


def getzler_check(m: MultiOperator, op_tuples: Sequence[Sequence[MultiOperator]],
                  tuples: Sequence[IndexTuple], nonflat: bool = False) -> Report:
    """(M o M)(A_1,...,A_n) must vanish exactly on every test tuple."""
    report = Report("getzler" + ("-nonflat" if nonflat else ""))
    for k, ops in enumerate(op_tuples):
        res = getzler_residual(m, ops, nonflat=nonflat)
        sub = evaluate_on_bank(res, tuples, f"n={len(ops)} #{k}")
        report.extend(sub)
    return report


# -- cup product and the section-3 identities -----------------------------------


def cup(m: MultiOperator, A: MultiOperator, B: MultiOperator) -> MultiOperator:
    """a u b = (-1)^{|A|-1} M_2(A,B)."""
    return op_scale(op_brace(m, [A, B]), sign(A.degree - 1))


def m12_residual(m: MultiOperator, A: MultiOperator, B: MultiOperator) -> MultiOperator:
    """M_1(M_2(A,B)) + M_2(M_1(A),B) + (-1)^{|A|} M_2(A,M_1(B))."""
    M2 = lambda x, y: op_brace(m, [x, y])
    return op_sum([
        derived_m1(m, M2(A, B)),
        M2(derived_m1(m, A), B),
        op_scale(M2(A, derived_m1(m, B)), sign(A.degree)),
    ])


def m12_check(m, A, B, tuples) -> Report:
    return evaluate_on_bank(m12_residual(m, A, B), tuples, "m12")


def cup_comm_residual(m: MultiOperator, A: MultiOperator,
                      B: MultiOperator) -> MultiOperator:
    """D(A,B) + M_2(A,B) + (-1)^{|A||B|} M_2(B,A) with
    D(A,B) = M_1(A o B) - M_1(A) o B - (-1)^{|A|} A o M_1(B)."""
    D = op_sum([
        derived_m1(m, op_compose(A, B)),
        op_scale(op_compose(derived_m1(m, A), B), -1),
        op_scale(op_compose(A, derived_m1(m, B)), -sign(A.degree)),
    ])
    return op_sum([
        D,
        op_brace(m, [A, B]),
        op_scale(op_brace(m, [B, A]), sign(A.degree * B.degree)),
    ])


def cup_comm_check(m, A, B, tuples) -> Report:
    return evaluate_on_bank(cup_comm_residual(m, A, B), tuples, "cup-comm")


def poisson_residual(m: MultiOperator, A: MultiOperator, B: MultiOperator,
                     C: MultiOperator) -> MultiOperator:
    """The bracket/M_2/M_1 identity behind the graded Poisson relation."""
    M2 = lambda x, y: op_brace(m, [x, y])
    sA = sign(A.degree)
    lhs = op_sum([
        op_bracket(A, M2(B, C)),
        op_scale(M2(op_bracket(A, B), C), -sA),
        op_scale(M2(B, op_bracket(A, C)), -sign(A.degree * (B.degree + 1))),
    ])
    rhs = op_sum([
        derived_m1(m, op_brace(A, [B, C])),
        op_scale(op_brace(derived_m1(m, A), [B, C]), -1),
        op_scale(op_brace(A, [derived_m1(m, B), C]), -sA),
        op_scale(op_brace(A, [B, derived_m1(m, C)]), -sign(A.degree + B.degree)),
    ])
    return op_add(lhs, op_scale(rhs, -sA))


def poisson_check(m, A, B, C, tuples) -> Report:
    return evaluate_on_bank(poisson_residual(m, A, B, C), tuples, "poisson")


def cup_assoc_residual(m: MultiOperator, A: MultiOperator, B: MultiOperator,
                       C: MultiOperator) -> MultiOperator:
    """(M_2 o M_2 + [M_1, M_3])(A,B,C); the Stasheff identity behind
    associativity of the cup product."""
    M2 = lambda x, y: op_brace(m, [x, y])
    M3 = lambda x, y, z: op_brace(m, [x, y, z])
    m2m2 = op_add(M2(M2(A, B), C), op_scale(M2(A, M2(B, C)), sign(A.degree)))
    bracket = op_sum([
        derived_m1(m, M3(A, B, C)),
        M3(derived_m1(m, A), B, C),
        op_scale(M3(A, derived_m1(m, B), C), sign(A.degree)),
        op_scale(M3(A, B, derived_m1(m, C)), sign(A.degree + B.degree)),
    ])
    return op_add(m2m2, bracket)


def cup_assoc_check(m, A, B, C, tuples) -> Report:
    return evaluate_on_bank(cup_assoc_residual(m, A, B, C), tuples, "cup-assoc")
