"""Tuple banks and seeded random operators for the verification suites.

Randomness is always driven by explicit string seeds through random.Random,
whose string seeding is stable across processes, so every "random" suite is
reproducible from its manifest.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .operators import MultiOperator
from .series import MultiSeries, ParameterContext
from .spaces import (AtomBasis, BasisIndex, Component, GradedElement,
                     GradedSpace, monomials_of_degree)

IndexTuple = Tuple[BasisIndex, ...]


def finite_test_space(degrees: Sequence[int] = (-1, 0, 1, 2),
                      context: Optional[ParameterContext] = None) -> GradedSpace:
    """One atom per listed degree: the small playground for brace identities."""
    if context is None:
        context = ParameterContext([])
    comps = {f"d{d}": Component(d, AtomBasis((f"e{d}",))) for d in degrees}
    return GradedSpace(context, comps, name="T")


def atom_tuple_bank(space: GradedSpace, max_len: int,
                    min_len: int = 0) -> List[IndexTuple]:
    basis = space.basis_indices()
    bank: List[IndexTuple] = []
    for L in range(min_len, max_len + 1):
        bank.extend(itertools.product(basis, repeat=L))
    return bank


def monomial_tuple_bank(space: GradedSpace, lengths: Iterable[int],
                        max_total_degree: int) -> List[IndexTuple]:
    """All basis tuples whose polynomial degrees sum to at most the bound;
    identities evaluated on such tuples never leave the truncation window."""
    by_degree = {}
    for idx in space.basis_indices():
        by_degree.setdefault(space.poly_degree_of(idx), []).append(idx)
    degrees = sorted(by_degree)
    bank: List[IndexTuple] = []

    def rec(slots_left: int, budget: int, prefix: Tuple[BasisIndex, ...]):
        if slots_left == 0:
            bank.append(prefix)
            return
        for d in degrees:
            if d > budget:
                break
            for idx in by_degree[d]:
                rec(slots_left - 1, budget - d, prefix + (idx,))

    for L in lengths:
        rec(L, max_total_degree, ())
    return bank


def sample_tuples(bank: Sequence[IndexTuple], count: int,
                  seed: str) -> List[IndexTuple]:
    rng = random.Random(f"sample:{seed}")
    if count >= len(bank):
        return list(bank)
    return rng.sample(list(bank), count)


def _random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-2, 2), rng.choice([1, 1, 2]))


def random_finite_operator(space: GradedSpace, arity: int, degree: int,
                           seed: str, density: float = 0.75) -> MultiOperator:
    """A seeded homogeneous operator on a finite-atom space, fully tabulated."""
    rng = random.Random(f"finite-op:{seed}")
    basis = space.basis_indices()
    by_degree = {}
    for idx in basis:
        by_degree.setdefault(space.degree_of(idx), []).append(idx)
    table = {}
    for idxs in itertools.product(basis, repeat=arity):
        target = degree + sum(space.degree_of(i) for i in idxs)
        atoms = by_degree.get(target)
        if not atoms or rng.random() > density:
            continue
        coeffs = {}
        for atom in atoms:
            c = _random_fraction(rng)
            if c:
                coeffs[atom] = MultiSeries.constant(space.context, c)
        if coeffs:
            table[idxs] = space.element(coeffs)
    return MultiOperator.tabulated(space, degree, table,
                                   name=f"R(a{arity},d{degree};{seed})")


def random_monomial_operator(space: GradedSpace, arity: int, degree: int,
                             seed: str, density: float = 0.8) -> MultiOperator:
    """A seeded homogeneous operator on a monomial-basis space.

    Outputs never raise the total polynomial degree, so identity sweeps over
    degree-bounded tuple banks stay inside the truncation window.  The kernel
    is procedural and deterministic in (seed, input tuple).
    """
    by_degree = {}
    for tag, comp in space.components.items():
        by_degree[comp.degree] = tag

    def kernel(idxs) -> GradedElement:
        target = degree + sum(space.degree_of(i) for i in idxs)
        tag = by_degree.get(target)
        if tag is None:
            return space.zero_element()
        key = ";".join(f"{i.tag}:{i.payload}" for i in idxs)
        rng = random.Random(f"mono-op:{seed}:{key}")
        if rng.random() > density:
            return space.zero_element()
        budget = sum(space.poly_degree_of(i) for i in idxs)
        nvars = space.components[tag].basis.nvars
        out_degree = rng.randint(0, min(budget, space.components[tag].basis.cap))
        monos = list(monomials_of_degree(nvars, out_degree))
        payload = rng.choice(monos)
        c = _random_fraction(rng)
        if not c:
            return space.zero_element()
        return space.element({BasisIndex(tag, payload):
                              MultiSeries.constant(space.context, c)})

    return MultiOperator.procedural(space, degree, (arity,), kernel,
                                    name=f"RW(a{arity},d{degree};{seed})")


def random_gauge_operator(space: GradedSpace, seed: str) -> MultiOperator:
    """A degree-0 gauge generator: a random degree-preserving arity-1 map that
    never raises the polynomial degree (so conjugation stays in the window)."""

    def kernel(idxs) -> GradedElement:
        (idx,) = idxs
        key = f"{idx.tag}:{idx.payload}"
        rng = random.Random(f"gauge:{seed}:{key}")
        coeffs = {}
        c = _random_fraction(rng)
        if c:
            coeffs[idx] = MultiSeries.constant(space.context, c)
        # optionally mix in one lower-degree monomial of the same component
        comp = space.components[idx.tag]
        own = space.poly_degree_of(idx)
        if own > 0 and rng.random() < 0.5:
            lower = rng.randint(0, own - 1)
            payload = rng.choice(list(monomials_of_degree(comp.basis.nvars, lower)))
            c2 = _random_fraction(rng)
            if c2:
                target = BasisIndex(idx.tag, payload)
                prev = coeffs.get(target)
                extra = MultiSeries.constant(space.context, c2)
                coeffs[target] = prev + extra if prev is not None else extra
        return space.element(coeffs)

    return MultiOperator.procedural(space, 0, (1,), kernel,
                                    name=f"w({seed})")
