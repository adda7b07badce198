"""Concrete model algebras: polynomial carriers, the Weyl-Moyal star product,
trivial extensions with their induced differential, the conversion to an
A-infinity family, the cup-word cocycles Delta_n, and the closed-form deformed
structure maps with their partition-sum generator.

Polynomials are sparse exponent-vector dictionaries over exact rationals.  The
two-term carrier puts the algebra summand at degree -1 and the module summand
at degree 0, which makes the extension product an operator of total degree 1
after the dot-product sign twist m_2(x,y) = (-1)^{|x|-1} x.y.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .deformation import CupWord, Family, FlowSeries, eval_cup_word, integrate_flow
from .derived import AInftyStructure, stasheff_check
from .errors import (DegreeError, PreconditionError, TruncationOverflow)
from .operators import (IndexTuple, MultiOperator, evaluate_on_bank,
                        op_add, op_at_zero, op_scale)
from .report import Report
from .series import MultiSeries, ParameterContext
from .spaces import (BasisIndex, Component, GradedElement, GradedSpace,
                     MonomialBasis)

Mono = Tuple[int, ...]
Poly = Dict[Mono, Fraction]
SeriesPoly = Dict[Mono, MultiSeries]

ALG = "alg"
MOD = "mod"


def _det(rows: List[List[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(rows)
    rows = [list(r) for r in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] / inv
            if factor == 0:
                continue
            for c in range(col, n):
                rows[r][c] -= factor * rows[col][c]
    return det


class PolyAlgebra:
    """k[x^1,...,x^{2m}] truncated at a total degree cap, with a constant
    skew-symmetric non-degenerate bracket matrix driving the star maps."""

    def __init__(self, nvars: int, degree_cap: int,
                 omega: Sequence[Sequence[Fraction]],
                 truncate: bool = False):
        if nvars % 2 != 0 or nvars <= 0:
            raise ValueError("the number of variables must be positive and even")
        omega = tuple(tuple(Fraction(x) for x in row) for row in omega)
        if len(omega) != nvars or any(len(r) != nvars for r in omega):
            raise ValueError("omega must be a square matrix of size nvars")
        for i in range(nvars):
            for j in range(nvars):
                if omega[i][j] != -omega[j][i]:
                    raise ValueError("omega must be skew-symmetric")
        if _det([list(r) for r in omega]) == 0:
            raise ValueError("omega must be non-degenerate")
        self.nvars = nvars
        self.degree_cap = degree_cap
        self.omega = omega
        self.truncate = truncate

    # -- plain polynomial arithmetic ------------------------------------------

    def zero(self) -> Poly:
        return {}

    def one(self) -> Poly:
        return {(0,) * self.nvars: Fraction(1)}

    def monomial(self, exps: Mono, coeff=1) -> Poly:
        if sum(exps) > self.degree_cap:
            if self.truncate:
                return {}
            raise TruncationOverflow(f"monomial degree {sum(exps)} over cap")
        return {tuple(exps): Fraction(coeff)}

    def add(self, a: Poly, b: Poly) -> Poly:
        out = dict(a)
        for m, c in b.items():
            s = out.get(m, Fraction(0)) + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        return out

    def mul(self, a: Poly, b: Poly) -> Poly:
        out: Poly = {}
        cap = self.degree_cap
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                if sum(m) > cap:
                    if self.truncate:
                        continue
                    raise TruncationOverflow(
                        f"product degree {sum(m)} exceeds cap {cap}")
                s = out.get(m, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(m, None)
                else:
                    out[m] = s
        return out

    def partial(self, a: Poly, i: int) -> Poly:
        out: Poly = {}
        for m, c in a.items():
            e = m[i]
            if e == 0:
                continue
            out[m[:i] + (e - 1,) + m[i + 1:]] = c * e
        return out

    def multi_partial(self, a: Poly, dirs: Sequence[int]) -> Poly:
        for i in dirs:
            if not a:
                break
            a = self.partial(a, i)
        return a

    def star_k(self, a: Poly, b: Poly, k: int) -> Poly:
        """(1/k!) omega^{i1 j1} ... omega^{ik jk} (d^k a)(d^k b)."""
        if k == 0:
            return self.mul(a, b)
        out: Poly = {}
        dirs = range(self.nvars)
        coeff = Fraction(1)
        for r in range(1, k + 1):
            coeff /= r
        for iseq in itertools.product(dirs, repeat=k):
            da = self.multi_partial(a, iseq)
            if not da:
                continue
            for jseq in itertools.product(dirs, repeat=k):
                w = coeff
                for i, j in zip(iseq, jseq):
                    w *= self.omega[i][j]
                    if w == 0:
                        break
                if w == 0:
                    continue
                db = self.multi_partial(b, jseq)
                if not db:
                    continue
                term = self.mul(da, db)
                for m, c in term.items():
                    s = out.get(m, Fraction(0)) + w * c
                    if s == 0:
                        out.pop(m, None)
                    else:
                        out[m] = s
        return out

    def max_star_order(self, a: Poly, b: Poly) -> int:
        da = max((sum(m) for m in a), default=0)
        db = max((sum(m) for m in b), default=0)
        return min(da, db)

    def poly_str(self, a: Poly, names: Optional[Sequence[str]] = None) -> str:
        if not a:
            return "0"
        if names is None:
            names = ["x", "y"] if self.nvars == 2 else [f"x{i+1}" for i in range(self.nvars)]
        parts = []
        for m in sorted(a, key=lambda e: (sum(e), e)):
            c = a[m]
            mono = " ".join(f"{n}^{e}" if e > 1 else n
                            for n, e in zip(names, m) if e > 0)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def load_omega(path) -> List[List[Fraction]]:
    """Plain-text omega matrix: one row per line, rationals separated by spaces."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([Fraction(tok) for tok in line.split()])
    return rows


def standard_omega(nvars: int) -> List[List[Fraction]]:
    """Block-diagonal canonical form: omega(2i, 2i+1) = 1."""
    omega = [[Fraction(0)] * nvars for _ in range(nvars)]
    for i in range(0, nvars, 2):
        omega[i][i + 1] = Fraction(1)
        omega[i + 1][i] = Fraction(-1)
    return omega


# -- the Weyl star product with exact parameter dependence ------------------------


def weyl_star(P: PolyAlgebra, ctx: ParameterContext, t_name: str,
              a: Poly, b: Poly) -> SeriesPoly:
    """a * b = a.b + sum_k t^k (a *_k b); the sum terminates, so the result is
    exact with no truncation in the parameter."""
    out: SeriesPoly = {}
    for k in range(0, P.max_star_order(a, b) + 1):
        coeff = (MultiSeries.one(ctx) if k == 0
                 else MultiSeries.variable(ctx, t_name, k))
        if coeff.is_zero():
            continue
        for m, c in P.star_k(a, b, k).items():
            term = coeff.scaled(c)
            out[m] = out[m] + term if m in out else term
    return {m: c for m, c in out.items() if not c.is_zero()}


def _series_poly_mul(P: PolyAlgebra, ctx: ParameterContext, t_name: str,
                     a: SeriesPoly, b: SeriesPoly) -> SeriesPoly:
    """Bilinear extension of weyl_star to series-valued polynomials."""
    out: SeriesPoly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            coeff = c1 * c2
            if coeff.is_zero():
                continue
            for m, c in weyl_star(P, ctx, t_name, {m1: Fraction(1)},
                                  {m2: Fraction(1)}).items():
                term = c * coeff
                out[m] = out[m] + term if m in out else term
    return {m: c for m, c in out.items() if not c.is_zero()}


def _sp_partial_t(a: SeriesPoly, t_name: str) -> SeriesPoly:
    out = {}
    for m, c in a.items():
        d = c.partial(t_name)
        if not d.is_zero():
            out[m] = d
    return out


# -- trivial extensions -------------------------------------------------------------


@dataclass
class TrivialExtension:
    """A two-term graded algebra A0 (+) A1 with the module-valued product and
    the degree -1 differential induced by a bimodule map with trivial kernel."""

    space: GradedSpace
    product: MultiOperator        # the dot product, no sign twist
    differential: MultiOperator   # h-tilde: module -> algebra, degree -1
    alg_tag: str = ALG
    mod_tag: str = MOD


def _to_element(space: GradedSpace, tag: str, poly: SeriesPoly) -> GradedElement:
    return space.element({BasisIndex(tag, m): c for m, c in poly.items()})


def make_weyl_carrier(P: PolyAlgebra, ctx: ParameterContext,
                      name: str = "W") -> GradedSpace:
    """Algebra copy at degree -1, module copy at degree 0."""
    comp = {
        ALG: Component(-1, MonomialBasis(P.nvars, P.degree_cap)),
        MOD: Component(0, MonomialBasis(P.nvars, P.degree_cap)),
    }
    return GradedSpace(ctx, comp, truncate_overflow=P.truncate, name=name)


def build_trivial_extension(
        space: GradedSpace,
        alg_mul: Callable[[Poly, Poly], SeriesPoly],
        act_left: Callable[[Poly, Poly], SeriesPoly],
        act_right: Callable[[Poly, Poly], SeriesPoly],
        h: Optional[Callable[[Poly], SeriesPoly]] = None,
        check_tuples: Optional[Sequence[IndexTuple]] = None,
        product_params: Iterable[str] = (),
        h_params: Iterable[str] = ()) -> TrivialExtension:
    """Assemble (a1,m1)(a2,m2) = (a1 a2, a1 m2 + m1 a2) and the differential
    h-tilde; optionally verify the bimodule and derivation laws on a sample.
    h defaults to the identity (the ideal case I = A).  `product_params` and
    `h_params` declare which parameters the supplied maps actually use."""
    ctx = space.context
    product_params = set(product_params)
    h_params = set(h_params)

    def mono(idx: BasisIndex) -> Poly:
        return {idx.payload: Fraction(1)}

    def product_kernel(idxs: IndexTuple) -> GradedElement:
        x, y = idxs
        if x.tag == ALG and y.tag == ALG:
            return _to_element(space, ALG, alg_mul(mono(x), mono(y)))
        if x.tag == ALG and y.tag == MOD:
            return _to_element(space, MOD, act_left(mono(x), mono(y)))
        if x.tag == MOD and y.tag == ALG:
            return _to_element(space, MOD, act_right(mono(x), mono(y)))
        return space.zero_element()

    all_names = {p.name for p in ctx.params}
    product = MultiOperator.procedural(space, 1, (2,), product_kernel, name="dot",
                                       param_free=all_names - product_params)

    if h is None:
        def h_fn(p: Poly) -> SeriesPoly:
            return {m: MultiSeries.constant(ctx, c) for m, c in p.items()}
    else:
        h_fn = h

    def diff_kernel(idxs: IndexTuple) -> GradedElement:
        (x,) = idxs
        if x.tag == MOD:
            return _to_element(space, ALG, h_fn(mono(x)))
        return space.zero_element()

    differential = MultiOperator.procedural(space, -1, (1,), diff_kernel,
                                            name="h~",
                                            param_free=all_names - h_params)
    ext = TrivialExtension(space, product, differential)
    if check_tuples is not None:
        report = extension_axioms_check(ext, check_tuples)
        if not report.ok:
            raise PreconditionError(f"trivial extension axioms failed: "
                                    f"{next(report.failures())[0]}")
    return ext


def extension_axioms_check(ext: TrivialExtension,
                           tuples: Sequence[IndexTuple]) -> Report:
    """Associativity of the dot product, h~^2 = 0, and the graded Leibniz rule
    (with DGA degrees = carrier degrees + 1) on the given index tuples."""
    report = Report("extension-axioms")
    space = ext.space
    mu, d = ext.product, ext.differential
    for idxs in tuples:
        if len(idxs) == 1:
            v = space.basis_element(idxs[0])
            report.add(f"h2 {space.index_str(idxs[0])}",
                       d.eval_elements([d.eval_elements([v])]))
            continue
        if len(idxs) != 2:
            continue
        x, y = (space.basis_element(i) for i in idxs)
        label = " ".join(space.index_str(i) for i in idxs)
        dga_deg_x = space.degree_of(idxs[0]) + 1
        lhs = d.eval_elements([mu.eval_elements([x, y])])
        rhs = mu.eval_elements([d.eval_elements([x]), y]) \
            + mu.eval_elements([x, d.eval_elements([y])]).scaled((-1) ** (dga_deg_x % 2))
        report.add(f"leibniz {label}", lhs - rhs)
    # associativity on all length-3 combinations drawn from the pair tuples
    seen = sorted({i for t in tuples for i in t},
                  key=space.index_sort_key)
    for x_i, y_i, z_i in itertools.combinations(seen, 3):
        x, y, z = (space.basis_element(i) for i in (x_i, y_i, z_i))
        try:
            lhs = mu.eval_elements([mu.eval_elements([x, y]), z])
            rhs = mu.eval_elements([x, mu.eval_elements([y, z])])
        except TruncationOverflow:
            continue
        label = " ".join(space.index_str(i) for i in (x_i, y_i, z_i))
        report.add(f"assoc {label}", lhs - rhs)
    return report


def dga_to_ainfty(ext: TrivialExtension, u_name: Optional[str] = None,
                  check_tuples: Optional[Sequence[IndexTuple]] = None
                  ) -> AInftyStructure:
    """m_2(x,y) = (-1)^{|x|-1} x.y plus, when the differential is present,
    m_1 = u h~ with u the degree-2 parameter."""
    space = ext.space
    mu = ext.product

    def m2_kernel(idxs: IndexTuple) -> GradedElement:
        value = mu.eval_indices(idxs)
        # (-1)^{|x|-1} with |x| the carrier degree of the first slot
        if (space.degree_of(idxs[0]) - 1) % 2:
            return -value
        return value

    m2 = MultiOperator.procedural(space, 1, (2,), m2_kernel, name="m2",
                                  param_free=mu.param_free)
    if u_name is None:
        structure = AInftyStructure(m2, flat=True, minimal=True)
    else:
        u = MultiSeries.variable(space.context, u_name)
        if space.context.parameter(u_name).degree != 2:
            raise DegreeError("the auxiliary parameter must have degree 2")
        m1 = op_scale(ext.differential, u)
        structure = AInftyStructure(op_add(m1, m2), flat=True, minimal=False)
    if check_tuples is not None:
        report = stasheff_check(structure.m, check_tuples)
        if not report.ok:
            raise PreconditionError("Stasheff residual nonzero for the converted DGA")
    return structure


# -- the Weyl family and its cocycles ------------------------------------------------


@dataclass
class WeylModel:
    """The polynomial Weyl algebra treated as a bimodule over itself."""

    P: PolyAlgebra
    ctx: ParameterContext
    t_name: str
    u_name: str
    space: GradedSpace
    extension: TrivialExtension
    family: Family


def weyl_family(P: PolyAlgebra, ctx: ParameterContext, t_name: str = "t",
                u_name: str = "u",
                check_tuples: Optional[Sequence[IndexTuple]] = None) -> WeylModel:
    """The two-parameter family u h~ + m_2(star) on the trivial extension of
    the Weyl algebra by itself (h = identity)."""
    space = make_weyl_carrier(P, ctx)
    star = lambda a, b: weyl_star(P, ctx, t_name, a, b)
    ext = build_trivial_extension(space, star, star, star, h=None,
                                  check_tuples=check_tuples,
                                  product_params={t_name})
    structure = dga_to_ainfty(ext, u_name, check_tuples=check_tuples)
    family = Family(structure.m, (t_name, u_name), space)
    return WeylModel(P, ctx, t_name, u_name, space, ext, family)


def delta_n(model_or_family, n: int) -> MultiOperator:
    """Delta_n = m_(t) u m_(u) u ... u m_(u) with n u-factors; degree 1."""
    family = model_or_family.family if isinstance(model_or_family, WeylModel) \
        else model_or_family
    t_name, u_name = family.param_names[0], family.param_names[1]
    word = CupWord.monomial((t_name,) + (u_name,) * n)
    return eval_cup_word(word, family)


def first_order_cocycle(model: WeylModel, n: int) -> MultiOperator:
    """The arity-(n+2) map (a1.a2)'.da3...da_{n+2}, nonzero on exactly three
    slot patterns; the module-first pattern carries the minus sign and the
    output component is fixed by total-degree homogeneity."""
    P, ctx, t_name = model.P, model.ctx, model.t_name
    space = model.space
    arity = n + 2

    def kernel(idxs: IndexTuple) -> GradedElement:
        if any(i.tag != MOD for i in idxs[2:]):
            return space.zero_element()
        first, second = idxs[0].tag, idxs[1].tag
        if first == ALG and second == ALG:
            out_tag, sgn = ALG, 1
        elif first == ALG and second == MOD:
            out_tag, sgn = MOD, 1
        elif first == MOD and second == ALG:
            out_tag, sgn = MOD, -1
        else:
            return space.zero_element()
        one = Fraction(1)
        acc = weyl_star(P, ctx, t_name, {idxs[0].payload: one},
                        {idxs[1].payload: one})
        acc = _sp_partial_t(acc, t_name)
        for idx in idxs[2:]:
            acc = _series_poly_mul(P, ctx, t_name, acc, {
                idx.payload: MultiSeries.one(ctx)})
        element = _to_element(space, out_tag, acc)
        return element if sgn == 1 else -element

    all_names = {p.name for p in ctx.params}
    return MultiOperator.procedural(space, 1, (arity,), kernel,
                                    name=f"mbar1[{n}]",
                                    param_free=all_names - {t_name})


def hochschild_check(model: WeylModel, n: int,
                     tuples: Iterable[IndexTuple]) -> Report:
    """The first-order cocycle identity, written out in dot products with the
    three displayed sign groups (degrees are carrier degrees)."""
    space = model.space
    mu = model.extension.product
    X = first_order_cocycle(model, n)
    report = Report(f"hochschild n={n}")
    for idxs in tuples:
        if len(idxs) != n + 3:
            continue
        v = [space.basis_element(i) for i in idxs]
        degs = [space.degree_of(i) % 2 for i in idxs]
        prefix = [0]
        for d in degs:
            prefix.append(prefix[-1] + d)
        total = space.zero_element()
        tail = X.eval_elements(v[1:])
        if not tail.is_zero():
            total = total - mu.eval_elements([v[0], tail])
        for k in range(0, n + 2):
            inner = mu.eval_elements([v[k], v[k + 1]])
            if inner.is_zero():
                continue
            args = v[:k] + [inner] + v[k + 2:]
            value = X.eval_elements(args)
            if value.is_zero():
                continue
            total = total - value.scaled((-1) ** (prefix[k + 1] % 2))
        head = X.eval_elements(v[:-1])
        if not head.is_zero():
            total = total + mu.eval_elements([head, v[-1]]).scaled(
                (-1) ** (prefix[n + 2] % 2))
        label = " ".join(space.index_str(i) for i in idxs)
        report.add(label, total)
    return report


def minimal_weyl_structure(model: WeylModel, s_name: str,
                           order_cap: int) -> FlowSeries:
    """Integrate the Delta_1 flow, then set u = 0: the minimal family m-bar."""
    word = CupWord.monomial((model.t_name, model.u_name))
    flow = integrate_flow(model.family, word, s_name, order_cap)
    orders = [op_at_zero(op, model.u_name) for op in flow.orders]
    base = Family(orders[0], (model.t_name,), model.space)
    return FlowSeries(s_name, orders, base)


def minimality_check(flow: FlowSeries, indices: Sequence[BasisIndex]) -> Report:
    """The arity-1 component of a minimal structure must vanish identically."""
    report = Report("minimality")
    m = flow.assembled()
    for idx in indices:
        if 1 in m.arities:
            report.add(flow.base.space.index_str(idx), m.eval_indices((idx,)))
    return report


# -- closed-form structure maps (the partition sum) -----------------------------------


@dataclass(frozen=True)
class PartitionTerm:
    """Block lengths l and star orders k with the suffix-sum inequalities."""

    ls: Tuple[int, ...]
    ks: Tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.ls)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def partition_terms(total: int) -> List[PartitionTerm]:
    """All (l, k) with sum l = sum k = total, entries >= 1, and suffix sums
    l_j + ... + l_p >= k_j + ... + k_p for every j >= 2; lexicographic order."""
    if total == 0:
        return [PartitionTerm((), ())]
    out: List[PartitionTerm] = []
    for p in range(1, total + 1):
        for ls in _compositions(total, p):
            for ks in _compositions(total, p):
                if all(sum(ls[j:]) >= sum(ks[j:]) for j in range(1, p)):
                    out.append(PartitionTerm(ls, ks))
    return out


def closed_form_f(P: PolyAlgebra, polys: Sequence[Poly]) -> Poly:
    """f_{n+1}(a_1,...,a_n): the left-to-right alternating star/product sum
    over partition terms with total n-1."""
    n = len(polys)
    out = P.zero()
    for term in partition_terms(n - 1):
        acc = polys[0]
        cursor = 1
        for l, k in zip(term.ls, term.ks):
            block = polys[cursor]
            for j in range(cursor + 1, cursor + l):
                block = P.mul(block, polys[j])
            acc = P.star_k(acc, block, k)
            cursor += l
            if not acc:
                break
        out = P.add(out, acc)
    return out


def closed_form_m(model: WeylModel, n: int, s_name: str) -> MultiOperator:
    """The arity-n map s^{n-2} f_n(slots 1..n-1) . (slot n) on the three
    nonzero slot patterns, with the displayed minus on the module-first one."""
    if n < 2:
        raise ValueError("closed-form maps start at arity 2")
    P, ctx, space = model.P, model.ctx, model.space
    s_pow = MultiSeries.variable(ctx, s_name, n - 2) if n > 2 \
        else MultiSeries.one(ctx)

    def kernel(idxs: IndexTuple) -> GradedElement:
        if any(i.tag != MOD for i in idxs[2:]):
            return space.zero_element()
        first = idxs[0].tag
        second = idxs[1].tag if n >= 2 else MOD
        if first == ALG and second == ALG:
            out_tag, sgn = ALG, 1
        elif first == ALG and second == MOD:
            out_tag, sgn = MOD, 1
        elif first == MOD and second == ALG:
            out_tag, sgn = MOD, -1
        else:
            return space.zero_element()
        polys = [{i.payload: Fraction(1)} for i in idxs]
        value = closed_form_f(P, polys[:-1])
        value = P.mul(value, polys[-1])
        if not value:
            return space.zero_element()
        coeffs = {BasisIndex(out_tag, m): s_pow.scaled(c)
                  for m, c in value.items()}
        element = space.element(coeffs)
        return element if sgn == 1 else -element

    all_names = {p.name for p in ctx.params}
    return MultiOperator.procedural(space, 1, (n,), kernel,
                                    name=f"closed-m{n}",
                                    param_free=all_names - {s_name})


def closed_form_structure(model: WeylModel, s_name: str,
                          max_arity: int) -> MultiOperator:
    """All closed-form maps of arity 2..max_arity assembled into one operator."""
    ops = [closed_form_m(model, n, s_name) for n in range(2, max_arity + 1)]
    acc = ops[0]
    for f in ops[1:]:
        acc = op_add(acc, f)
    return acc
