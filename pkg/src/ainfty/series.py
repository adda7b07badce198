"""Truncated multivariate formal power series over exact rationals.

This is the scalar ring k[[t_1, ..., t_n]] used everywhere else.  Each formal
variable carries an even integer degree and a hard exponent cap; multiplication
silently drops monomials that exceed any cap (t-adic truncation), so every
result is exact within the declared window.  No floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple, Union

from .errors import ContextMismatchError, DegreeError, UnknownParameterError

Exponents = Tuple[int, ...]
Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class Parameter:
    """A formal variable: name, even Z-degree and maximum retained exponent."""

    name: str
    degree: int
    cap: int

    def __post_init__(self):
        if self.degree % 2 != 0:
            raise DegreeError(f"parameter {self.name!r} has odd degree {self.degree}")
        if self.cap < 0:
            raise ValueError(f"parameter {self.name!r} has negative cap {self.cap}")


class ParameterContext:
    """An ordered, immutable collection of parameters shared by all series."""

    __slots__ = ("params", "_pos")

    def __init__(self, params: Iterable[Parameter] = ()):
        params = tuple(params)
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "_pos", {p.name: i for i, p in enumerate(params)})

    def __len__(self):
        return len(self.params)

    def position(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise UnknownParameterError(f"unknown parameter {name!r}") from None

    def parameter(self, name: str) -> Parameter:
        return self.params[self.position(name)]

    @property
    def zero_exponents(self) -> Exponents:
        return (0,) * len(self.params)

    def monomial_degree(self, exps: Exponents) -> int:
        return sum(e * p.degree for e, p in zip(exps, self.params))

    def within_caps(self, exps: Exponents) -> bool:
        return all(e <= p.cap for e, p in zip(exps, self.params))

    def monomial_str(self, exps: Exponents) -> str:
        parts = []
        for e, p in zip(exps, self.params):
            if e == 1:
                parts.append(p.name)
            elif e > 1:
                parts.append(f"{p.name}^{e}")
        return "*".join(parts)

    def __repr__(self):
        inner = ", ".join(f"{p.name}:{p.degree}(cap {p.cap})" for p in self.params)
        return f"ParameterContext({inner})"


def _as_fraction(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def _monomial_key(exps: Exponents):
    # graded-lexicographic: total exponent first, then the vector itself
    return (sum(exps), exps)


class MultiSeries:
    """A finite sum of rational multiples of capped monomials.

    Zero coefficients are never stored; instances are immutable by convention.
    """

    __slots__ = ("context", "terms")

    def __init__(self, context: ParameterContext, terms: Dict[Exponents, Fraction]):
        self.context = context
        self.terms = {e: c for e, c in terms.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, context: ParameterContext) -> "MultiSeries":
        return cls(context, {})

    @classmethod
    def constant(cls, context: ParameterContext, value: Scalar) -> "MultiSeries":
        value = _as_fraction(value)
        if value == 0:
            return cls.zero(context)
        return cls(context, {context.zero_exponents: value})

    @classmethod
    def one(cls, context: ParameterContext) -> "MultiSeries":
        return cls.constant(context, 1)

    @classmethod
    def variable(cls, context: ParameterContext, name: str, power: int = 1,
                 coeff: Scalar = 1) -> "MultiSeries":
        pos = context.position(name)
        if power < 0:
            raise ValueError("negative powers are not representable")
        if power > context.params[pos].cap:
            return cls.zero(context)
        exps = list(context.zero_exponents)
        exps[pos] = power
        return cls(context, {tuple(exps): _as_fraction(coeff)})

    # -- ring structure ----------------------------------------------------

    def _require_same_context(self, other: "MultiSeries"):
        if self.context is not other.context:
            raise ContextMismatchError("series built over different contexts")

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        self._require_same_context(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, _ZERO) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return MultiSeries(self.context, terms)

    def __neg__(self) -> "MultiSeries":
        return MultiSeries(self.context, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + (-other)

    def __mul__(self, other) -> "MultiSeries":
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        self._require_same_context(other)
        ctx = self.context
        caps = tuple(p.cap for p in ctx.params)
        terms: Dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if any(x > cap for x, cap in zip(e, caps)):
                    continue  # t-adic truncation, silent by design
                s = terms.get(e, _ZERO) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return MultiSeries(ctx, terms)

    def __rmul__(self, other) -> "MultiSeries":
        if isinstance(other, (int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def scaled(self, value: Scalar) -> "MultiSeries":
        value = _as_fraction(value)
        if value == 0:
            return MultiSeries.zero(self.context)
        return MultiSeries(self.context, {e: c * value for e, c in self.terms.items()})

    # -- calculus ----------------------------------------------------------

    def partial(self, name: str) -> "MultiSeries":
        """Formal partial derivative with respect to one parameter."""
        pos = self.context.position(name)
        terms: Dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            k = e[pos]
            if k == 0:
                continue
            shifted = e[:pos] + (k - 1,) + e[pos + 1:]
            terms[shifted] = terms.get(shifted, _ZERO) + k * c
        return MultiSeries(self.context, terms)

    def eval_at_zero(self, name: str) -> "MultiSeries":
        """Drop every term with a positive power of the named parameter."""
        pos = self.context.position(name)
        return MultiSeries(self.context,
                           {e: c for e, c in self.terms.items() if e[pos] == 0})

    def coefficient(self, name: str, power: int) -> "MultiSeries":
        """The coefficient of name^power, as a series free of that parameter."""
        pos = self.context.position(name)
        terms = {}
        for e, c in self.terms.items():
            if e[pos] == power:
                terms[e[:pos] + (0,) + e[pos + 1:]] = c
        return MultiSeries(self.context, terms)

    def max_power(self, name: str) -> int:
        pos = self.context.position(name)
        return max((e[pos] for e in self.terms), default=0)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        if len(self.terms) != 1:
            return False
        value = self.terms.get(self.context.zero_exponents)
        return value == 1

    def degree(self) -> Optional[int]:
        """The common monomial degree, or None if inhomogeneous.  Zero -> 0."""
        degs = {self.context.monomial_degree(e) for e in self.terms}
        if not degs:
            return 0
        if len(degs) > 1:
            return None
        return degs.pop()

    def constant_term(self) -> Fraction:
        return self.terms.get(self.context.zero_exponents, _ZERO)

    def __eq__(self, other):
        return (isinstance(other, MultiSeries)
                and self.context is other.context
                and self.terms == other.terms)

    def __hash__(self):
        return hash((id(self.context), frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_monomial_key):
            c = self.terms[e]
            mono = self.context.monomial_str(e)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiSeries({self})"


_ZERO = Fraction(0)
