"""Families of A-infinity structures and the inner-deformation flow.

A family is a structure map whose coefficients live in the parameter ring; its
partial derivatives m_(i) are M_1-cocycles, cup words in them are flow
directions, and the flow

    d(m~)/ds = Delta[m~],   m~|_{s=0} = m

is integrated by exact Taylor recursion in the flow parameter.  The same
machinery transports Maurer-Cartan elements along the flow.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .derived import cup, derived_m1, stasheff_check
from .errors import DegreeError, PreconditionError
from .operators import (IndexTuple, MultiOperator, evaluate_on_bank,
                        op_at_zero, op_brace, op_bracket, op_partial,
                        op_scale, op_slice, op_sum)
from .report import Report
from .series import MultiSeries, Scalar
from .spaces import GradedElement, GradedSpace


@dataclass
class Family:
    """A structure map of total degree 1 over declared even-degree parameters."""

    m: MultiOperator
    param_names: Tuple[str, ...]
    space: GradedSpace
    _partials: Dict[str, MultiOperator] = field(default_factory=dict, repr=False)

    def partial(self, name: str) -> MultiOperator:
        if name not in self.param_names:
            from .errors import UnknownParameterError
            raise UnknownParameterError(f"{name!r} is not a family parameter")
        op = self._partials.get(name)
        if op is None:
            op = op_partial(self.m, name)
            self._partials[name] = op
        return op

    def partial_multi(self, names: Sequence[str]) -> MultiOperator:
        op = self.m
        for name in names:
            op = op_partial(op, name)
        return op

    def undeformed(self) -> MultiOperator:
        """The structure at all declared parameters = 0."""
        op = self.m
        for name in self.param_names:
            op = op_at_zero(op, name)
        return op

    def validate(self, tuples: Iterable[IndexTuple]) -> Report:
        return stasheff_check(self.m, tuples)


def cocycle_check(family: Family, name: str,
                  tuples: Iterable[IndexTuple]) -> Report:
    """M_1(m_(i)) must vanish: the derivative of a family is a cocycle."""
    res = derived_m1(family.m, family.partial(name))
    return evaluate_on_bank(res, tuples, f"cocycle d/d{name}")


def bracket_triviality_check(family: Family, i: str, j: str,
                             tuples: Iterable[IndexTuple]) -> Report:
    """[m_(i), m_(j)] + M_1(m_(ij)) must vanish: the bracket of two family
    derivatives is exhibited as an explicit coboundary."""
    lhs = op_bracket(family.partial(i), family.partial(j))
    rhs = derived_m1(family.m, family.partial_multi([i, j]))
    return evaluate_on_bank(lhs + rhs, tuples, f"bracket-trivial ({i},{j})")


# -- cup words -----------------------------------------------------------------


@dataclass(frozen=True)
class CupWord:
    """A sum of coefficient * m_(i1) u m_(i2) u ... terms, LEFT-associated."""

    terms: Tuple[Tuple[Union[Scalar, MultiSeries], Tuple[str, ...]], ...]

    @classmethod
    def monomial(cls, indices: Sequence[str],
                 coeff: Union[Scalar, MultiSeries] = 1) -> "CupWord":
        if not indices:
            raise ValueError("a cup word term needs at least one index")
        return cls(((coeff, tuple(indices)),))

    def __post_init__(self):
        for _, indices in self.terms:
            if len(indices) < 1:
                raise ValueError("empty cup monomial")


def eval_cup_word(word: CupWord, family: Family) -> MultiOperator:
    """Evaluate a cup word on a family; nesting is left-associated and each
    pairing carries the (-1)^{|left|-1} cup sign."""
    ops: List[MultiOperator] = []
    for coeff, indices in word.terms:
        acc = family.partial(indices[0])
        for name in indices[1:]:
            acc = cup(family.m, acc, family.partial(name))
        if not (isinstance(coeff, int) and coeff == 1):
            acc = op_scale(acc, coeff)
        ops.append(acc)
    return op_sum(ops, space=family.space)


def cup_word_degree(word: CupWord, family: Family) -> int:
    degs = set()
    ctx = family.space.context
    for coeff, indices in word.terms:
        d = sum(1 - ctx.parameter(n).degree for n in indices) + (len(indices) - 1)
        if isinstance(coeff, MultiSeries):
            cd = coeff.degree()
            if cd is None:
                raise DegreeError("cup word coefficient must be homogeneous")
            d += cd
        degs.add(d)
    if len(degs) != 1:
        raise DegreeError(f"inhomogeneous cup word: degrees {sorted(degs)}")
    return degs.pop()


# -- the inner-deformation flow ---------------------------------------------------


@dataclass
class FlowSeries:
    """A family expanded in one flow parameter with per-order coefficients."""

    flow_name: str
    orders: List[MultiOperator]
    base: Family
    _assembled: Optional[MultiOperator] = field(default=None, repr=False)

    @property
    def order_cap(self) -> int:
        return len(self.orders) - 1

    def order(self, k: int) -> MultiOperator:
        return self.orders[k]

    def assembled(self) -> MultiOperator:
        """The full series sum_k s^k m_(k) as one operator."""
        if self._assembled is None:
            self._assembled = _assemble(self.orders, self.flow_name,
                                        self.base.space)
        return self._assembled

    def family(self) -> Family:
        return Family(self.assembled(),
                      self.base.param_names + (self.flow_name,),
                      self.base.space)


def _assemble(orders: Sequence[MultiOperator], flow_name: str,
              space: GradedSpace) -> MultiOperator:
    ctx = space.context
    terms = [orders[0]]
    for k in range(1, len(orders)):
        terms.append(op_scale(orders[k],
                              MultiSeries.variable(ctx, flow_name, k)))
    return op_sum(terms, space=space)


OrderSupports = Dict[int, frozenset]


def _brace_order_supports(host: OrderSupports, inserts: Sequence[OrderSupports],
                          cap: int) -> OrderSupports:
    """Arity bounds per flow order for host{inserts...}, tracking that every
    coefficient of flow order h pairs only with insert orders summing to <= cap."""
    out: Dict[int, set] = {}
    l = len(inserts)
    items = [sorted(s.items()) for s in inserts]
    for h, host_arities in host.items():
        for combo in itertools.product(*items):
            total = h + sum(j for j, _ in combo)
            if total > cap:
                continue
            bucket = out.setdefault(total, set())
            for big in host_arities:
                if big < l:
                    continue
                for arity_combo in itertools.product(*[sorted(a) for _, a in combo]):
                    bucket.add(big - l + sum(arity_combo))
    return {k: frozenset(v) for k, v in out.items()}


def _cup_word_order_supports(word: CupWord, base: OrderSupports,
                             partials: Dict[str, OrderSupports],
                             cap: int) -> OrderSupports:
    out: Dict[int, set] = {}
    for _, indices in word.terms:
        acc = partials[indices[0]]
        for name in indices[1:]:
            acc = _brace_order_supports(base, [acc, partials[name]], cap)
        for j, arities in acc.items():
            out.setdefault(j, set()).update(arities)
    return {k: frozenset(v) for k, v in out.items()}


def integrate_flow(family: Family, word: CupWord, flow_name: str,
                   order_cap: int) -> FlowSeries:
    """Taylor recursion: m_(k+1) = [s^k] Delta[m~ through order k] / (k+1).

    Alongside the operators, arity bounds are propagated per flow order (the
    local-finiteness bookkeeping); each order is restricted to its bound so
    later sweeps never explore arities that are structurally zero.
    """
    if order_cap < 1:
        raise PreconditionError("order_cap must be at least 1")
    ctx = family.space.context
    flow_param = ctx.parameter(flow_name)
    delta_degree = cup_word_degree(word, family)
    if flow_param.degree != 1 - delta_degree:
        raise DegreeError(
            f"flow parameter degree {flow_param.degree} != 1 - |Delta| = {1 - delta_degree}")
    if flow_param.cap < order_cap:
        raise PreconditionError(
            f"flow parameter cap {flow_param.cap} below requested order {order_cap}")
    orders: List[MultiOperator] = [family.m]
    support: Dict[int, frozenset] = {0: family.m.arities}
    partial_support: Dict[str, OrderSupports] = {
        name: {0: family.partial(name).arities} for name in family.param_names}
    for k in range(order_cap):
        truncated = Family(_assemble(orders, flow_name, family.space),
                           family.param_names, family.space)
        rhs = eval_cup_word(word, truncated)
        rhs_orders = _cup_word_order_supports(word, support, partial_support,
                                              order_cap)
        bound = rhs_orders.get(k, frozenset())
        orders.append(op_slice(rhs, flow_name, k,
                               Fraction(1, k + 1)).restricted(bound))
        support[k + 1] = orders[-1].arities
        for name in family.param_names:
            partial_support[name][k + 1] = orders[-1].arities
    return FlowSeries(flow_name, orders, family)


def flow_mc_check(flow: FlowSeries, tuples: Iterable[IndexTuple]) -> Report:
    """m~ o m~ on the bank; the residual carries every flow order at once."""
    report = stasheff_check(flow.assembled(), tuples)
    report.check = f"flow-mc[{flow.flow_name}^<= {flow.order_cap}]"
    return report


def gauge_transform(family: Family, w: MultiOperator, gauge_name: str,
                    order_cap: int) -> Family:
    """The truncated adjoint series sum_n g^n/n! (ad_w)^n (m)."""
    if w.degree != 0:
        raise DegreeError(f"gauge generator must have total degree 0, got {w.degree}")
    ctx = family.space.context
    terms = [family.m]
    current = family.m
    factorial = 1
    for n in range(1, order_cap + 1):
        current = op_bracket(w, current)
        factorial *= n
        coeff = MultiSeries.variable(ctx, gauge_name, n, Fraction(1, factorial))
        terms.append(op_scale(current, coeff))
    return Family(op_sum(terms, space=family.space),
                  family.param_names + (gauge_name,), family.space)


# -- local finiteness --------------------------------------------------------------


@dataclass(frozen=True)
class FinitenessEntry:
    label: str
    arity_bound: int      # largest arity with a nonzero value at params = 0
    support_bound: int    # largest arity in the (conservative) support


def _max_nonzero_arity(op: MultiOperator, param_names: Sequence[str],
                       tuples: Sequence[IndexTuple]) -> int:
    at_zero = op
    for name in param_names:
        at_zero = op_at_zero(at_zero, name)
    best = 0
    for n in sorted(at_zero.arities, reverse=True):
        if n <= best:
            break
        for idxs in tuples:
            if len(idxs) != n:
                continue
            if not at_zero.eval_indices(idxs).is_zero():
                best = n
                break
    return best


def local_finiteness_report(obj: Union[Family, FlowSeries], k_max: int,
                            tuples: Sequence[IndexTuple]) -> List[FinitenessEntry]:
    """Per derivative (or flow) order: the largest arity carrying a nonzero
    component at params = 0, found by evaluating over the witness tuples, next
    to the conservative support bound.  Always finite by construction."""
    out: List[FinitenessEntry] = []
    if isinstance(obj, FlowSeries):
        params = obj.base.param_names
        for k in range(min(k_max, obj.order_cap) + 1):
            op = obj.orders[k]
            out.append(FinitenessEntry(
                f"{obj.flow_name}-order {k}",
                _max_nonzero_arity(op, params, tuples),
                max(op.arities, default=0)))
        return out
    names = obj.param_names

    def multi_indices(order):
        if order == 0:
            yield ()
            return
        for rest in multi_indices(order - 1):
            start = names.index(rest[0]) if rest else 0
            for i in range(start, len(names)):
                yield (names[i],) + rest

    for order in range(k_max + 1):
        for mi in multi_indices(order):
            op = obj.partial_multi(mi)
            label = "d/d(" + ",".join(mi) + ")" if mi else "order 0"
            out.append(FinitenessEntry(
                label, _max_nonzero_arity(op, names, tuples),
                max(op.arities, default=0)))
    return out


# -- Maurer-Cartan machinery --------------------------------------------------------


def _structure_operator(obj: Union[Family, FlowSeries, MultiOperator]) -> Tuple[MultiOperator, GradedSpace]:
    if isinstance(obj, FlowSeries):
        return obj.assembled(), obj.base.space
    if isinstance(obj, Family):
        return obj.m, obj.space
    return obj, obj.space


def mc_residual(obj: Union[Family, FlowSeries, MultiOperator],
                a: GradedElement) -> GradedElement:
    """sum_{n>=1} m_n(a,...,a) for a degree-0 element; exact within the caps."""
    m, space = _structure_operator(obj)
    if not a.is_zero() and a.degree() != 0:
        raise PreconditionError("MC elements must have total degree 0")
    out = space.zero_element()
    for n in sorted(m.arities):
        if n == 0:
            continue
        out = out + m.eval_elements((a,) * n)
    return out


def derivative_operator(space: GradedSpace, name: str) -> MultiOperator:
    """D_i a = da/dt_i: arity 1, linear over the base field but not the ring."""
    degree = -space.context.parameter(name).degree

    def kernel(args):
        return args[0].map_coefficients(lambda c: c.partial(name))

    return MultiOperator(space, degree, (1,), element_kernel=kernel,
                         scalar_linear=False, name=f"D_{name}")


def integrate_mc_flow(flow: FlowSeries, indices: Sequence[str],
                      a0: GradedElement, order_cap: int,
                      partials: Mapping[str, MultiOperator]
                      ) -> List[GradedElement]:
    """Transport an MC element along the flow (single cup monomial Delta).

    Solves D_0 a = -(-1)^l Delta(D_{i_1}, m_(i_2), ..., m_(i_l))(a) order by
    order; the first slot is the parameter-derivative operator, the remaining
    slots come from the supplied family-derivative table, and the nesting is
    the same left-associated M_2 shape as the cup word.  Returns the Taylor
    coefficients of a-bar in the flow parameter (order 0 is a0).
    """
    space = flow.base.space
    ctx = space.context
    l = len(indices)
    if l < 1:
        raise PreconditionError("the cup monomial must have at least one index")
    if not mc_residual(flow.orders[0], a0).is_zero():
        raise PreconditionError("a0 is not an MC element of the undeformed structure")
    m_full = flow.assembled()
    nest = derivative_operator(space, indices[0])
    for name in indices[1:]:
        nest = op_brace(m_full, [nest, partials[name]],
                        name=f"M2({nest.name},{name})")
    prefactor = Fraction(-1) if l % 2 == 0 else Fraction(1)   # -(-1)^l
    flow_name = flow.flow_name
    a_orders: List[GradedElement] = [a0]
    for k in range(order_cap):
        current = a_orders[0]
        for j in range(1, len(a_orders)):
            current = current + a_orders[j].scaled(
                MultiSeries.variable(ctx, flow_name, j))
        rhs = space.zero_element()
        for n in sorted(nest.arities):
            if n == 0:
                continue
            rhs = rhs + nest.eval_elements((current,) * n)
        coeff = rhs.map_coefficients(lambda c: c.coefficient(flow_name, k))
        a_orders.append(coeff.scaled(prefactor * Fraction(1, k + 1)))
    return a_orders


def assemble_element(orders: Sequence[GradedElement], flow_name: str,
                     space: GradedSpace) -> GradedElement:
    ctx = space.context
    out = orders[0]
    for k in range(1, len(orders)):
        out = out + orders[k].scaled(MultiSeries.variable(ctx, flow_name, k))
    return out
