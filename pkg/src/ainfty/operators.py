"""Multilinear operators on a graded space: composition, bracket, braces.

An operator f of arity n and (total) degree |f| sends v_1 (x) ... (x) v_n to an
element of degree |f| + sum |v_i|, where element degrees include the even
degrees of scalar coefficients.  The composition product is

    (f o g)(v_1, ..., v_{m+n-1})
        = sum_i (-1)^{|g| (|v_1|+...+|v_i|)} f(v_1, ..., v_i, g(v_{i+1}, ...), ...)

and the braces A{A_1, ..., A_m} sum over all order-preserving non-overlapping
insertions, each A_i consuming its arity of consecutive inputs, with the sign
(-1)^epsilon, epsilon = sum_i |A_i| (|v_1| + ... + |v_{k_i}|) where k_i counts
the inputs before A_i's block.  A{} = A and A{B} = A o B.

Evaluation is memoized on basis tuples.  Operators flagged scalar_linear
extend multilinearly over the scalar ring (all parameter degrees are even, so
coefficients move out front without signs); the parameter-derivative operator
is the one deliberate exception.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DegreeError, SpaceMismatchError
from .report import Report
from .series import MultiSeries, Scalar
from .spaces import BasisIndex, GradedElement, GradedSpace

IndexTuple = Tuple[BasisIndex, ...]


def _accumulate(acc: Dict[BasisIndex, MultiSeries], element: GradedElement,
                coeff: Optional[MultiSeries] = None, negate: bool = False) -> None:
    """acc += (+/-) coeff * element, mutating the accumulator dict in place."""
    for idx, c in element.coeffs.items():
        if coeff is not None:
            c = c * coeff
            if c.is_zero():
                continue
        if negate:
            c = -c
        prev = acc.get(idx)
        if prev is None:
            acc[idx] = c
        else:
            s = prev + c
            if s.is_zero():
                del acc[idx]
            else:
                acc[idx] = s


class MultiOperator:
    """A degree-homogeneous multilinear operator with finite arity support.

    `arities` is a proven bound on the support: evaluation outside it is zero
    by fiat, and keeping the bound tight is what keeps derived-operator
    evaluation affordable.  `param_free` lists parameters that provably never
    appear in any output coefficient, so partial derivatives in them vanish;
    `summands`/`scaling` record sum/scale structure so derivatives distribute.
    """

    __slots__ = ("space", "degree", "arities", "scalar_linear", "name",
                 "param_free", "summands", "scaling",
                 "_index_kernel", "_element_kernel", "_memo")

    def __init__(self, space: GradedSpace, degree: int, arities: Iterable[int],
                 index_kernel: Optional[Callable[[IndexTuple], GradedElement]] = None,
                 element_kernel: Optional[Callable[[Sequence[GradedElement]], GradedElement]] = None,
                 scalar_linear: bool = True, name: str = "op",
                 param_free: Iterable[str] = ()):
        if index_kernel is None and element_kernel is None:
            raise ValueError("an operator needs at least one kernel")
        self.space = space
        self.degree = degree
        self.arities = frozenset(arities)
        self.scalar_linear = scalar_linear
        self.name = name
        self.param_free = frozenset(param_free)
        self.summands: Optional[Tuple["MultiOperator", ...]] = None
        self.scaling = None
        self._index_kernel = index_kernel
        self._element_kernel = element_kernel
        self._memo: Dict[IndexTuple, GradedElement] = {}

    def restricted(self, arities: Iterable[int]) -> "MultiOperator":
        """A view with the arity bound intersected; values are unchanged."""
        new = frozenset(arities) & self.arities
        if new == self.arities:
            return self
        if self.scalar_linear:
            return MultiOperator(self.space, self.degree, new,
                                 index_kernel=self.eval_indices,
                                 name=self.name, param_free=self.param_free)
        return MultiOperator(self.space, self.degree, new,
                             element_kernel=self.eval_elements,
                             scalar_linear=False,
                             name=self.name, param_free=self.param_free)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, space: GradedSpace, degree: int = 0) -> "MultiOperator":
        return cls(space, degree, (), index_kernel=lambda idxs: space.zero_element(),
                   name="0",
                   param_free=(p.name for p in space.context.params))

    @classmethod
    def tabulated(cls, space: GradedSpace, degree: int,
                  table: Dict[IndexTuple, GradedElement],
                  name: str = "tab",
                  param_free: Iterable[str] = ()) -> "MultiOperator":
        table = {k: v for k, v in table.items() if not v.is_zero()}
        arities = {len(k) for k in table}

        def kernel(idxs: IndexTuple) -> GradedElement:
            return table.get(idxs, space.zero_element())

        return cls(space, degree, arities, index_kernel=kernel, name=name,
                   param_free=param_free)

    @classmethod
    def procedural(cls, space: GradedSpace, degree: int, arities: Iterable[int],
                   fn: Callable[[IndexTuple], GradedElement],
                   name: str = "proc",
                   param_free: Iterable[str] = ()) -> "MultiOperator":
        return cls(space, degree, arities, index_kernel=fn, name=name,
                   param_free=param_free)

    # -- evaluation ----------------------------------------------------------

    def eval_indices(self, idxs: IndexTuple) -> GradedElement:
        if len(idxs) not in self.arities:
            return self.space.zero_element()
        cached = self._memo.get(idxs)
        if cached is not None:
            return cached
        if self._index_kernel is not None:
            value = self._index_kernel(idxs)
        else:
            value = self._element_kernel(
                tuple(self.space.basis_element(i) for i in idxs))
        self._memo[idxs] = value
        return value

    def eval_elements(self, args: Sequence[GradedElement]) -> GradedElement:
        if len(args) not in self.arities:
            return self.space.zero_element()
        for a in args:
            if a.space is not self.space:
                raise SpaceMismatchError(f"argument outside the space of {self.name}")
            if a.is_zero():
                return self.space.zero_element()
        if self.scalar_linear:
            return self._eval_multilinear(args)
        # decompose into homogeneous parts so the sign exponents are defined
        out = self.space.zero_element()
        for combo in itertools.product(*[a.homogeneous_parts().values() for a in args]):
            out = out + self._element_kernel(combo)
        return out

    def _eval_multilinear(self, args: Sequence[GradedElement]) -> GradedElement:
        acc: Dict[BasisIndex, object] = {}
        for combo in itertools.product(*[tuple(a.coeffs.items()) for a in args]):
            idxs = tuple(idx for idx, _ in combo)
            value = self.eval_indices(idxs)
            if value.is_zero():
                continue
            coeff = None
            for _, c in combo:
                if not c.is_one():
                    coeff = c if coeff is None else coeff * c
            _accumulate(acc, value, coeff)
        return GradedElement(self.space, acc)

    def __call__(self, *args: GradedElement) -> GradedElement:
        return self.eval_elements(args)

    # -- linear structure ------------------------------------------------------

    def __add__(self, other: "MultiOperator") -> "MultiOperator":
        return op_add(self, other)

    def __sub__(self, other: "MultiOperator") -> "MultiOperator":
        return op_add(self, op_scale(other, -1))

    def __neg__(self) -> "MultiOperator":
        return op_scale(self, -1)

    def __repr__(self):
        ar = ",".join(str(a) for a in sorted(self.arities))
        return f"<{self.name} deg {self.degree} arity {{{ar}}}>"


# -- sums and scalings ---------------------------------------------------------


def op_add(f: MultiOperator, g: MultiOperator, strict: bool = True) -> MultiOperator:
    if f.space is not g.space:
        raise SpaceMismatchError("operators over different spaces")
    if strict and f.degree != g.degree:
        raise DegreeError(f"degree mismatch in sum: {f.degree} vs {g.degree}")

    def kernel(args):
        return f.eval_elements(args) + g.eval_elements(args)

    out = MultiOperator(f.space, f.degree, f.arities | g.arities,
                        element_kernel=kernel,
                        scalar_linear=f.scalar_linear and g.scalar_linear,
                        name=f"({f.name}+{g.name})",
                        param_free=f.param_free & g.param_free)
    flat: List[MultiOperator] = []
    for part in (f, g):
        flat.extend(part.summands if part.summands is not None else (part,))
    out.summands = tuple(flat)
    return out


def op_sum(ops: Sequence[MultiOperator], space: Optional[GradedSpace] = None,
           degree: int = 0) -> MultiOperator:
    if not ops:
        if space is None:
            raise ValueError("empty sum needs an explicit space")
        return MultiOperator.zero(space, degree)
    acc = ops[0]
    for f in ops[1:]:
        acc = op_add(acc, f)
    return acc


def op_scale(f: MultiOperator, c: Union[MultiSeries, Scalar]) -> MultiOperator:
    if isinstance(c, MultiSeries):
        extra = c.degree()
        if extra is None:
            raise DegreeError("scaling coefficient must be degree-homogeneous")
        if c.is_zero():
            return MultiOperator.zero(f.space, f.degree)
        coeff_params = {p.name for p, keep in
                        zip(c.context.params,
                            [any(e[i] for e in c.terms)
                             for i in range(len(c.context.params))]) if keep}
        param_free = f.param_free - coeff_params
    else:
        extra = 0
        if c == 0:
            return MultiOperator.zero(f.space, f.degree)
        param_free = f.param_free

    def kernel(args):
        return f.eval_elements(args).scaled(c)

    out = MultiOperator(f.space, f.degree + extra, f.arities,
                        element_kernel=kernel, scalar_linear=f.scalar_linear,
                        name=f"({c})*{f.name}", param_free=param_free)
    out.scaling = (f, c)
    return out


def op_map_coefficients(f: MultiOperator, fn, degree_shift: int,
                        name: str, param_free: Iterable[str] = ()) -> MultiOperator:
    """Apply a ring map (partial derivative, slice, ...) to every output."""

    def kernel(idxs):
        return f.eval_indices(idxs).map_coefficients(fn)

    return MultiOperator(f.space, f.degree + degree_shift, f.arities,
                         index_kernel=kernel, name=name,
                         param_free=frozenset(param_free))


def op_partial(f: MultiOperator, param: str) -> MultiOperator:
    """Coefficient-wise partial derivative; stays multilinear over the ring.

    Distributes over recorded sum/scale structure and returns a genuine zero
    operator on parameter-free components, so the arity support of a family
    derivative is as tight as the construction allows.
    """
    deg = f.space.context.parameter(param).degree
    target_degree = f.degree - deg
    if param in f.param_free:
        return MultiOperator.zero(f.space, target_degree)
    if f.summands is not None:
        parts = [op_partial(g, param) for g in f.summands]
        parts = [p for p in parts if p.arities]
        if not parts:
            return MultiOperator.zero(f.space, target_degree)
        return op_sum(parts)
    if f.scaling is not None:
        inner, c = f.scaling
        parts = []
        if isinstance(c, MultiSeries):
            dc = c.partial(param)
            if not dc.is_zero():
                parts.append(op_scale(inner, dc))
        d_inner = op_partial(inner, param)
        if d_inner.arities:
            parts.append(op_scale(d_inner, c))
        if not parts:
            return MultiOperator.zero(f.space, target_degree)
        return op_sum(parts)
    return op_map_coefficients(f, lambda c: c.partial(param), -deg,
                               f"d({f.name})/d{param}",
                               param_free=f.param_free)


def op_at_zero(f: MultiOperator, param: str) -> MultiOperator:
    return op_map_coefficients(f, lambda c: c.eval_at_zero(param), 0,
                               f"{f.name}|{param}=0",
                               param_free=f.param_free | {param})


def op_slice(f: MultiOperator, param: str, power: int,
             factor: Scalar = 1) -> MultiOperator:
    """The coefficient of param^power, optionally rescaled."""
    deg = f.space.context.parameter(param).degree

    def fn(c):
        out = c.coefficient(param, power)
        return out if factor == 1 else out.scaled(factor)

    return op_map_coefficients(f, fn, -power * deg,
                               f"[{param}^{power}]{f.name}",
                               param_free=f.param_free | {param})


# -- braces, composition, bracket ------------------------------------------------


def insertion_positions(n: int, arities: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """All non-overlapping starting positions k_1 <= ... for the given block sizes.

    k_i counts the inputs preceding the i-th block; blocks may touch, and
    arity-0 blocks may share a position (they still occupy distinct slots in
    order).
    """
    m = len(arities)
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + arities[i]

    def rec(i: int, start: int) -> Iterator[Tuple[int, ...]]:
        if i == m:
            yield ()
            return
        for k in range(start, n - suffix[i] + 1):
            for rest in rec(i + 1, k + arities[i]):
                yield (k,) + rest

    return rec(0, 0)


def op_brace(host: MultiOperator, inserts: Sequence[MultiOperator],
             name: Optional[str] = None) -> MultiOperator:
    """The brace host{inserts...}; host{} = host, host{g} = host o g."""
    inserts = tuple(inserts)
    if not inserts:
        return host
    for g in inserts:
        if g.space is not host.space:
            raise SpaceMismatchError("brace operands over different spaces")
    m = len(inserts)
    space = host.space
    degree = host.degree + sum(g.degree for g in inserts)
    arities = set()
    for big in host.arities:
        if big < m:
            continue
        for combo in itertools.product(*[sorted(g.arities) for g in inserts]):
            arities.add(big - m + sum(combo))
    if name is None:
        name = f"{host.name}{{{','.join(g.name for g in inserts)}}}"
    if not arities:
        return MultiOperator.zero(space, degree)

    insert_parities = [g.degree % 2 for g in inserts]

    def kernel(args: Sequence[GradedElement]) -> GradedElement:
        n = len(args)
        degs = []
        for a in args:
            d = a.degree()
            if d is None:
                raise DegreeError("brace evaluation needs homogeneous arguments")
            degs.append(d % 2)
        prefix = [0] * (n + 1)
        for i, d in enumerate(degs):
            prefix[i + 1] = prefix[i] + d
        acc: Dict[BasisIndex, MultiSeries] = {}
        for combo in itertools.product(*[sorted(g.arities) for g in inserts]):
            host_arity = n - sum(combo) + m
            if host_arity not in host.arities or host_arity < m:
                continue
            for ks in insertion_positions(n, combo):
                eps = 0
                for p, k in zip(insert_parities, ks):
                    eps += p * prefix[k]
                mixed: List[GradedElement] = []
                cursor = 0
                dead = False
                for g, a, k in zip(inserts, combo, ks):
                    mixed.extend(args[cursor:k])
                    w = g.eval_elements(args[k:k + a])
                    if w.is_zero():
                        dead = True
                        break
                    mixed.append(w)
                    cursor = k + a
                if dead:
                    continue
                mixed.extend(args[cursor:])
                value = host.eval_elements(mixed)
                if value.is_zero():
                    continue
                _accumulate(acc, value, negate=bool(eps % 2))
        return GradedElement(space, acc)

    shared_free = host.param_free
    for g in inserts:
        shared_free &= g.param_free
    return MultiOperator(space, degree, arities, element_kernel=kernel,
                         scalar_linear=host.scalar_linear
                         and all(g.scalar_linear for g in inserts),
                         name=name, param_free=shared_free)


def op_compose(f: MultiOperator, g: MultiOperator) -> MultiOperator:
    return op_brace(f, [g], name=f"({f.name}o{g.name})")


def op_bracket(f: MultiOperator, g: MultiOperator) -> MultiOperator:
    sign = -1 if (f.degree * g.degree) % 2 else 1
    return op_add(op_compose(f, g), op_scale(op_compose(g, f), -sign),
                  strict=True)


# -- verification helpers --------------------------------------------------------


def evaluate_on_bank(f: MultiOperator, tuples: Iterable[IndexTuple],
                     check: str, report: Optional[Report] = None) -> Report:
    """Evaluate an operator on basis tuples; every value must be exactly zero."""
    if report is None:
        report = Report(check)
    space = f.space
    for idxs in tuples:
        if len(idxs) not in f.arities:
            continue
        value = f.eval_indices(idxs)
        report.add(" ".join(space.index_str(i) for i in idxs) or "()", value)
    return report


def operators_agree(f: MultiOperator, g: MultiOperator,
                    tuples: Iterable[IndexTuple], check: str = "agree") -> Report:
    report = Report(check)
    space = f.space
    for idxs in tuples:
        lhs = f.eval_indices(idxs)
        rhs = g.eval_indices(idxs)
        report.add(" ".join(space.index_str(i) for i in idxs) or "()", lhs - rhs)
    return report


def validate_degree(f: MultiOperator, tuples: Iterable[IndexTuple],
                    check: str = "degree-law") -> Report:
    """Check |f(v_1..v_n)| = |f| + sum |v_i| on sampled basis tuples."""
    report = Report(check)
    space = f.space
    for idxs in tuples:
        if len(idxs) not in f.arities:
            continue
        value = f.eval_indices(idxs)
        expected = f.degree + sum(space.degree_of(i) for i in idxs)
        label = " ".join(space.index_str(i) for i in idxs) or "()"
        if value.is_zero():
            report.add(label, value)
            continue
        actual = value.degree()
        residual = space.zero_element() if actual == expected else value
        report.add(f"{label} (deg {actual} vs {expected})", residual)
    return report


# -- pre-Jacobi identity -----------------------------------------------------------


def _prejacobi_configs(m: int, n: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Shuffle data for Eq. pre-J: positions k_i and block lengths r_i >= 0.

    k_i counts the B's preceding A_i (including those consumed by earlier
    blocks); blocks are non-overlapping and order-preserving.
    """

    def rec(i: int, start: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        if i == m:
            yield (), ()
            return
        for k in range(start, n + 1):
            for r in range(0, n - k + 1):
                for ks, rs in rec(i + 1, k + r):
                    yield (k,) + ks, (r,) + rs

    return rec(0, 0)


def prejacobi_rhs(A: MultiOperator, As: Sequence[MultiOperator],
                  Bs: Sequence[MultiOperator]) -> MultiOperator:
    """The shuffle sum side of the higher pre-Jacobi identity."""
    m, n = len(As), len(Bs)
    space = A.space
    b_parity_prefix = [0]
    for B in Bs:
        b_parity_prefix.append(b_parity_prefix[-1] + B.degree % 2)
    terms: List[MultiOperator] = []
    for ks, rs in _prejacobi_configs(m, n):
        eps = sum((As[i].degree % 2) * b_parity_prefix[ks[i]] for i in range(m)) % 2
        mixed: List[MultiOperator] = []
        cursor = 0
        for i in range(m):
            mixed.extend(Bs[cursor:ks[i]])
            mixed.append(op_brace(As[i], Bs[ks[i]:ks[i] + rs[i]]))
            cursor = ks[i] + rs[i]
        mixed.extend(Bs[cursor:])
        term = op_brace(A, mixed)
        terms.append(term if eps == 0 else op_scale(term, -1))
    return op_sum(terms, space=space,
                  degree=A.degree + sum(f.degree for f in As)
                  + sum(f.degree for f in Bs))


def prejacobi_residual(A: MultiOperator, As: Sequence[MultiOperator],
                       Bs: Sequence[MultiOperator]) -> MultiOperator:
    lhs = op_brace(op_brace(A, As), Bs)
    return lhs - prejacobi_rhs(A, As, Bs)


def verify_prejacobi(A: MultiOperator, As: Sequence[MultiOperator],
                     Bs: Sequence[MultiOperator],
                     tuples: Iterable[IndexTuple]) -> Report:
    residual = prejacobi_residual(A, As, Bs)
    return evaluate_on_bank(residual, tuples, "pre-jacobi")


# -- dumps -------------------------------------------------------------------------


def op_dump(f: MultiOperator, tuples: Sequence[IndexTuple]) -> str:
    """Canonical textual table of an operator over the given basis tuples."""
    space = f.space
    lines = [f"operator {f.name}",
             f"space {space.name}",
             f"degree {f.degree}",
             f"arities {sorted(f.arities)}"]
    ordered = sorted((t for t in tuples if len(t) in f.arities),
                     key=lambda t: (len(t), tuple(space.index_sort_key(i) for i in t)))
    for idxs in ordered:
        value = f.eval_indices(idxs)
        if value.is_zero():
            continue
        key = ",".join(space.index_str(i) for i in idxs)
        lines.append(f"[{key}] -> {value}")
    return "\n".join(lines) + "\n"
