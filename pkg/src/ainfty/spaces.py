"""Z-graded vector spaces with explicit bases and Koszul sign utilities.

Two basis modes are supported: finite lists of named atoms (for randomized
identity tests on small spaces) and monomial families with a global polynomial
degree cap (for polynomial algebra carriers).  The polynomial degree of a
monomial payload is bookkeeping for the truncation window only; the Z-grading
of a basis vector is the intrinsic degree of its component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import ContextMismatchError, SpaceMismatchError, TruncationOverflow
from .series import MultiSeries, ParameterContext, Scalar

Payload = Union[str, Tuple[int, ...]]


class BasisIndex(NamedTuple):
    """A basis vector label: component tag plus atom name or exponent vector."""

    tag: str
    payload: Payload


@dataclass(frozen=True)
class AtomBasis:
    atoms: Tuple[str, ...]


@dataclass(frozen=True)
class MonomialBasis:
    nvars: int
    cap: int


@dataclass(frozen=True)
class Component:
    degree: int
    basis: Union[AtomBasis, MonomialBasis]


def monomials_of_degree(nvars: int, degree: int) -> Iterator[Tuple[int, ...]]:
    """All exponent vectors in nvars variables with the given total degree."""
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree + 1):
        for rest in monomials_of_degree(nvars - 1, degree - first):
            yield (first,) + rest


class GradedSpace:
    """A direct sum of graded components, each with an explicit basis."""

    __slots__ = ("context", "components", "truncate_overflow", "name", "_order",
                 "_basis_cache", "_zero")

    def __init__(self, context: ParameterContext,
                 components: Dict[str, Component],
                 truncate_overflow: bool = False,
                 name: str = "V"):
        self.context = context
        self.components = dict(components)
        self.truncate_overflow = truncate_overflow
        self.name = name
        self._order = {tag: i for i, tag in enumerate(self.components)}
        self._basis_cache: Dict[BasisIndex, "GradedElement"] = {}
        self._zero: Optional["GradedElement"] = None

    # -- basis bookkeeping ---------------------------------------------------

    def degree_of(self, idx: BasisIndex) -> int:
        return self.components[idx.tag].degree

    def poly_degree_of(self, idx: BasisIndex) -> int:
        if isinstance(idx.payload, tuple):
            return sum(idx.payload)
        return 0

    def check_index(self, idx: BasisIndex) -> bool:
        comp = self.components.get(idx.tag)
        if comp is None:
            return False
        if isinstance(comp.basis, AtomBasis):
            return idx.payload in comp.basis.atoms
        return (isinstance(idx.payload, tuple)
                and len(idx.payload) == comp.basis.nvars
                and all(e >= 0 for e in idx.payload)
                and sum(idx.payload) <= comp.basis.cap)

    def index_sort_key(self, idx: BasisIndex):
        comp = self.components[idx.tag]
        if isinstance(comp.basis, AtomBasis):
            return (self._order[idx.tag], 0, comp.basis.atoms.index(idx.payload))
        return (self._order[idx.tag], sum(idx.payload), idx.payload)

    def basis_indices(self, tags: Optional[Sequence[str]] = None,
                      max_poly_degree: Optional[int] = None) -> List[BasisIndex]:
        """All basis indices in canonical order (component, graded-lex)."""
        out: List[BasisIndex] = []
        for tag in (tags if tags is not None else self.components):
            comp = self.components[tag]
            if isinstance(comp.basis, AtomBasis):
                out.extend(BasisIndex(tag, a) for a in comp.basis.atoms)
            else:
                top = comp.basis.cap
                if max_poly_degree is not None:
                    top = min(top, max_poly_degree)
                for d in range(top + 1):
                    out.extend(BasisIndex(tag, m)
                               for m in monomials_of_degree(comp.basis.nvars, d))
        return out

    def monomial_var_names(self, tag: str) -> List[str]:
        basis = self.components[tag].basis
        if not isinstance(basis, MonomialBasis):
            raise ValueError(f"component {tag!r} has no monomial basis")
        if basis.nvars == 2:
            return ["x", "y"]
        return [f"x{i + 1}" for i in range(basis.nvars)]

    def index_str(self, idx: BasisIndex) -> str:
        if isinstance(idx.payload, str):
            return f"{idx.tag}:{idx.payload}"
        names = self.monomial_var_names(idx.tag)
        parts = []
        for name, e in zip(names, idx.payload):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return f"{idx.tag}:{' '.join(parts) if parts else '1'}"

    # -- element construction --------------------------------------------------

    def zero_element(self) -> "GradedElement":
        if self._zero is None:
            self._zero = GradedElement(self, {})
        return self._zero

    def basis_element(self, idx: BasisIndex) -> "GradedElement":
        cached = self._basis_cache.get(idx)
        if cached is not None:
            return cached
        if not self.check_index(idx):
            if isinstance(idx.payload, tuple) and self.truncate_overflow:
                return self.zero_element()
            raise TruncationOverflow(f"basis index out of window: {idx}")
        element = GradedElement(self, {idx: MultiSeries.one(self.context)})
        self._basis_cache[idx] = element
        return element

    def element(self, coeffs: Dict[BasisIndex, MultiSeries]) -> "GradedElement":
        clean = {}
        for idx, c in coeffs.items():
            if c.is_zero():
                continue
            if not self.check_index(idx):
                if isinstance(idx.payload, tuple) and self.truncate_overflow:
                    continue
                raise TruncationOverflow(f"basis index out of window: {idx}")
            if c.context is not self.context:
                raise ContextMismatchError("coefficient from a foreign context")
            clean[idx] = c
        return GradedElement(self, clean)

    def __repr__(self):
        return f"GradedSpace({self.name})"


class GradedElement:
    """A finitely supported combination of basis vectors with series coefficients."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: GradedSpace, coeffs: Dict[BasisIndex, MultiSeries]):
        self.space = space
        self.coeffs = coeffs

    def _require_same_space(self, other: "GradedElement"):
        if self.space is not other.space:
            raise SpaceMismatchError("elements live in different spaces")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._require_same_space(other)
        coeffs = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            s = coeffs[idx] + c if idx in coeffs else c
            if s.is_zero():
                coeffs.pop(idx, None)
            else:
                coeffs[idx] = s
        return GradedElement(self.space, coeffs)

    def __neg__(self) -> "GradedElement":
        return GradedElement(self.space, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def scaled(self, s: Union[MultiSeries, Scalar]) -> "GradedElement":
        if isinstance(s, (int, Fraction)):
            if s == 0:
                return self.space.zero_element()
            return GradedElement(self.space,
                                 {i: c.scaled(s) for i, c in self.coeffs.items()})
        coeffs = {}
        for idx, c in self.coeffs.items():
            p = c * s
            if not p.is_zero():
                coeffs[idx] = p
        return GradedElement(self.space, coeffs)

    def map_coefficients(self, fn) -> "GradedElement":
        coeffs = {}
        for idx, c in self.coeffs.items():
            p = fn(c)
            if not p.is_zero():
                coeffs[idx] = p
        return GradedElement(self.space, coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> Optional[int]:
        """Uniform total degree (basis degree + coefficient degree), else None."""
        degs = set()
        for idx, c in self.coeffs.items():
            base = self.space.degree_of(idx)
            for e in c.terms:
                degs.add(base + c.context.monomial_degree(e))
                if len(degs) > 1:
                    return None
        if not degs:
            return 0
        return degs.pop()

    def homogeneous_parts(self) -> Dict[int, "GradedElement"]:
        parts: Dict[int, Dict[BasisIndex, Dict]] = {}
        out: Dict[int, GradedElement] = {}
        for idx, c in self.coeffs.items():
            base = self.space.degree_of(idx)
            for e, q in c.terms.items():
                d = base + c.context.monomial_degree(e)
                bucket = parts.setdefault(d, {})
                bucket.setdefault(idx, {})[e] = q
        for d, bucket in parts.items():
            out[d] = GradedElement(self.space,
                                   {i: MultiSeries(self.space.context, t)
                                    for i, t in bucket.items()})
        return out

    def items_sorted(self):
        return sorted(self.coeffs.items(),
                      key=lambda kv: self.space.index_sort_key(kv[0]))

    def __eq__(self, other):
        return (isinstance(other, GradedElement)
                and self.space is other.space
                and self.coeffs == other.coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        return "  ".join(f"({self.space.index_str(i)})[{c}]"
                         for i, c in self.items_sorted())

    def __repr__(self):
        return f"GradedElement({self})"


def koszul_exponent(degree_pairs: Iterable[Tuple[int, int]]) -> int:
    """Sum of |x|*|y| mod 2 for the (-1)^epsilon prefactors."""
    return sum(a * b for a, b in degree_pairs) % 2


def koszul_sign(degree_pairs: Iterable[Tuple[int, int]]) -> int:
    return -1 if koszul_exponent(degree_pairs) else 1
