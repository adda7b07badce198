"""Named verification suites: the batch driver's workhorse.

Each suite builds its models from an explicit configuration and returns a
list of reports; a run passes only if every residual in every report is
exactly zero.  All randomness comes from the configuration seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .deformation import (CupWord, Family, FlowSeries, assemble_element,
                          bracket_triviality_check, cocycle_check,
                          gauge_transform, integrate_flow, integrate_mc_flow,
                          local_finiteness_report, mc_residual)
from .derived import (cup_assoc_check, cup_comm_check, getzler_check,
                      m12_check, poisson_check, stasheff_check)
from .models import (ALG, MOD, PolyAlgebra, WeylModel, closed_form_m,
                     delta_n, first_order_cocycle, hochschild_check,
                     minimal_weyl_structure, standard_omega, weyl_family)
from .operators import (MultiOperator, evaluate_on_bank, op_at_zero,
                        op_bracket, op_brace, op_compose, op_scale,
                        operators_agree, prejacobi_residual)
from .report import Report
from .sampling import (atom_tuple_bank, finite_test_space,
                       monomial_tuple_bank, random_finite_operator,
                       random_gauge_operator, random_monomial_operator,
                       sample_tuples)
from .series import MultiSeries, Parameter, ParameterContext
from .spaces import BasisIndex


@dataclass
class ModelConfig:
    """Everything a run depends on; serialized into the manifest."""

    nvars: int = 2
    degree_cap: int = 4
    omega: Optional[Sequence[Sequence[Fraction]]] = None
    s_order: int = 3
    gauge_order: int = 3
    tuple_len: int = 5
    seed: str = "0"
    truncate: bool = False
    param_caps: Dict[str, int] = field(default_factory=dict)

    def context(self) -> ParameterContext:
        caps = {"t": self.degree_cap, "u": 2, "s": self.s_order,
                "g": self.gauge_order}
        caps.update(self.param_caps)
        return ParameterContext([
            Parameter("t", 0, caps["t"]),
            Parameter("u", 2, caps["u"]),
            Parameter("s", 0, caps["s"]),
            Parameter("g", 0, caps["g"]),
        ])

    def algebra(self) -> PolyAlgebra:
        omega = self.omega if self.omega is not None else standard_omega(self.nvars)
        return PolyAlgebra(self.nvars, self.degree_cap, omega,
                           truncate=self.truncate)

    def model(self) -> WeylModel:
        return weyl_family(self.algebra(), self.context())


# -- suite: braces (finite space) ------------------------------------------------


def braces_suite(seed: str = "0", tuple_len: int = 5,
                 n_operators: int = 200) -> List[Report]:
    """Pre-Jacobi, Gerstenhaber skew/Jacobi, brace degeneracies, on a pool of
    seeded random homogeneous operators over the 4-dimensional test space."""
    space = finite_test_space()
    reports: List[Report] = []
    pool: List[MultiOperator] = []
    import random as _random
    rng = _random.Random(f"braces:{seed}")
    while len(pool) < n_operators:
        arity = rng.randint(1, 3)
        degree = rng.randint(-1, 2)
        pool.append(random_finite_operator(space, arity, degree,
                                           f"{seed}:{len(pool)}"))
    cursor = 0

    def take(k):
        nonlocal cursor
        ops = pool[cursor:cursor + k]
        cursor += k
        return ops

    prej = Report("pre-jacobi")
    while cursor + 5 <= len(pool) and len(prej.entries) < 10 ** 6:
        A, = take(1)
        As = take(rng.randint(1, 2))
        Bs = take(min(2, len(pool) - cursor - 1) or 1)
        if cursor >= len(pool):
            break
        residual = prejacobi_residual(A, As, Bs)
        bank = atom_tuple_bank(space, min(tuple_len, max(residual.arities, default=0)))
        evaluate_on_bank(residual, bank, "pre-jacobi", prej)
    reports.append(prej)

    skew = Report("gerstenhaber-skew")
    jacobi = Report("graded-jacobi")
    degen = Report("brace-degeneracies")
    bank = atom_tuple_bank(space, tuple_len)
    for i in range(0, len(pool) - 2, 3):
        f, g, h = pool[i], pool[i + 1], pool[i + 2]
        sgn = -1 if (f.degree * g.degree) % 2 else 1
        res = op_bracket(f, g) + op_scale(op_bracket(g, f), sgn)
        evaluate_on_bank(res, bank, f"skew#{i}", skew)
        res = (op_bracket(op_bracket(f, g), h) - op_bracket(f, op_bracket(g, h))
               + op_scale(op_bracket(g, op_bracket(f, h)), sgn))
        evaluate_on_bank(res, bank, f"jacobi#{i}", jacobi)
    for i, f in enumerate(pool[:40]):
        if op_brace(f, []) is not f:
            degen.add(f"A{{}}=A #{i}", space.basis_element(space.basis_indices()[0]))
        g = pool[(i + 7) % len(pool)]
        res = op_brace(f, [g]) - op_compose(f, g)
        evaluate_on_bank(res, bank, f"A{{B}}=AoB #{i}", degen)
        if f.degree % 2:
            res = op_bracket(f, f) - op_scale(op_compose(f, f), 2)
            evaluate_on_bank(res, bank, f"[f,f]=2ff #{i}", degen)
    reports.extend([skew, jacobi, degen])
    return reports


# -- suite: derived structure on the Weyl family ---------------------------------


def _random_weyl_ops(model: WeylModel, seed: str,
                     count: int) -> List[MultiOperator]:
    import random as _random
    rng = _random.Random(f"weyl-ops:{seed}")
    ops = []
    for i in range(count):
        arity = rng.randint(1, 2)
        degree = rng.choice([-1, 0, 1])
        ops.append(random_monomial_operator(model.space, arity, degree,
                                            f"{seed}:{i}"))
    return ops


def derived_suite(cfg: ModelConfig, getzler_tuples: int = 4,
                  bank_size: int = 150) -> List[Report]:
    """Getzler lift (M o M = 0 for n <= 3) plus the section-3 cochain checks
    on the Weyl-extension family, over seeded operator tuples."""
    model = cfg.model()
    m = model.family.m
    bank = monomial_tuple_bank(model.space, [1, 2, 3], cfg.degree_cap)
    bank = sample_tuples(bank, bank_size, cfg.seed)
    ops = _random_weyl_ops(model, cfg.seed, 3 * getzler_tuples + 3)
    reports: List[Report] = []
    op_tuples = []
    for n in (1, 2, 3):
        for k in range(getzler_tuples):
            base = (n * 7 + k * 3) % (len(ops) - 3)
            op_tuples.append(ops[base:base + n])
    reports.append(getzler_check(m, op_tuples, bank))
    A, B, C = ops[0], ops[1], ops[2]
    reports.append(m12_check(m, A, B, bank))
    reports.append(cup_comm_check(m, A, B, bank))
    reports.append(poisson_check(m, A, B, C, bank))
    reports.append(cup_assoc_check(m, A, B, C, bank))
    return reports


# -- suite: family identities ------------------------------------------------------


def family_suite(cfg: ModelConfig, max_len: int = 3) -> List[Report]:
    model = cfg.model()
    bank = monomial_tuple_bank(model.space, range(1, max_len + 1),
                               cfg.degree_cap)
    reports = [stasheff_check(model.family.m, bank)]
    reports.append(cocycle_check(model.family, "t", bank))
    reports.append(cocycle_check(model.family, "u", bank))
    reports.append(bracket_triviality_check(model.family, "t", "u", bank))
    return reports


# -- suite: the full worked example -------------------------------------------------


def _flow_residual_bank(model: WeylModel, cfg: ModelConfig,
                        max_arity: int) -> List[Tuple[BasisIndex, ...]]:
    return monomial_tuple_bank(model.space, range(1, max_arity + 1),
                               cfg.degree_cap)


def example_suite(cfg: ModelConfig, deep: bool = True) -> List[Report]:
    """Criteria 5-11: flow soundness, closed form, Hochschild cocycle, star
    product, MC transport, local finiteness, gauge invariance."""
    model = cfg.model()
    family = model.family
    reports: List[Report] = []

    # star product: commutator and associativity (exact in the parameter)
    reports.append(star_product_report(cfg))

    # the flow and its soundness through the order cap
    word = CupWord.monomial(("t", "u"))
    flow = integrate_flow(family, word, "s", cfg.s_order)
    # residual arities beyond 3 + s_order carry flow orders above the cap and
    # are identically zero in the truncated ring
    bank = _flow_residual_bank(model, cfg, max_arity=3 + cfg.s_order)
    from .deformation import flow_mc_check
    reports.append(flow_mc_check(flow, bank))

    foc = first_order_cocycle(model, 1)
    bank3 = monomial_tuple_bank(model.space, [3], cfg.degree_cap)
    rep = operators_agree(flow.order(1), foc, bank3, "first-order-formula")
    reports.append(rep)

    # minimal structure vs the closed form at t = 0
    mbar = minimal_weyl_structure(model, "s", cfg.s_order)
    reports.append(closed_form_report(cfg, model, mbar))
    reports.append(weyl_identity_report(cfg))
    reports.append(m3_display_report(model))

    # Hochschild cocycle identities for n <= 2
    for n in (0, 1, 2):
        bank_n = monomial_tuple_bank(model.space, [n + 3],
                                     min(cfg.degree_cap, 2))
        reports.append(hochschild_check(model, n, bank_n))

    # minimality of m-bar
    mini = Report("minimality")
    assembled = mbar.assembled()
    for idx in model.space.basis_indices():
        if 1 in assembled.arities:
            mini.add(model.space.index_str(idx), assembled.eval_indices((idx,)))
    reports.append(mini)

    # MC flow for every capped module monomial
    mc = Report("mc-flow")
    for idx in model.space.basis_indices(tags=[MOD]):
        a0 = model.space.basis_element(idx)
        orders = integrate_mc_flow(mbar, ("t", "u"), a0, cfg.s_order,
                                   {"u": model.extension.differential})
        abar = assemble_element(orders, "s", model.space)
        mc.add(model.space.index_str(idx), mc_residual(mbar, abar))
    reports.append(mc)

    # local finiteness: evaluated arity bound 2+k per s-order
    reports.append(local_finiteness_report_check(cfg))

    # gauge invariance
    w = random_gauge_operator(model.space, f"gauge:{cfg.seed}")
    gauged = gauge_transform(family, w, "g", cfg.gauge_order)
    gbank = monomial_tuple_bank(model.space, [1, 2, 3], cfg.degree_cap)
    grep = stasheff_check(gauged.m, gbank)
    grep.check = "gauge-stasheff"
    reports.append(grep)
    return reports


def star_product_report(cfg: ModelConfig) -> Report:
    """x*y - y*x = 2 t omega^{12} and exact associativity on monomial triples."""
    from .models import weyl_star
    P = cfg.algebra()
    ctx = cfg.context()
    report = Report("star-product")
    x = P.monomial(tuple([1] + [0] * (P.nvars - 1)))
    y = P.monomial(tuple([0, 1] + [0] * (P.nvars - 2)))
    comm = dict(weyl_star(P, ctx, "t", x, y))
    for m, c in weyl_star(P, ctx, "t", y, x).items():
        comm[m] = comm.get(m, MultiSeries.zero(ctx)) - c
    expected = MultiSeries.variable(ctx, "t", 1, 2 * P.omega[0][1])
    zero_mono = (0,) * P.nvars
    diff = comm.get(zero_mono, MultiSeries.zero(ctx)) - expected
    residual = {zero_mono: diff}
    residual.update({m: c for m, c in comm.items() if m != zero_mono})
    space = make_poly_probe_space(P, ctx)
    report.add("x*y - y*x = 2t w12",
               space.element({BasisIndex("p", m): c for m, c in residual.items()
                              if not c.is_zero()}))
    monos = [m for d in range(0, P.degree_cap + 1)
             for m in _monomials(P.nvars, d)]
    for ma, mb, mc_ in itertools.product(monos, repeat=3):
        if sum(ma) + sum(mb) + sum(mc_) > P.degree_cap:
            continue
        a, b, c = ({m: Fraction(1)} for m in (ma, mb, mc_))
        lhs = _star_sp(P, ctx, weyl_star(P, ctx, "t", a, b), c)
        rhs = _star_sp(P, ctx, a, weyl_star(P, ctx, "t", b, c), swapped=True)
        residual = dict(lhs)
        for m, s in rhs.items():
            residual[m] = residual.get(m, MultiSeries.zero(ctx)) - s
        report.add(f"assoc {ma} {mb} {mc_}",
                   space.element({BasisIndex("p", m): s
                                  for m, s in residual.items()
                                  if not s.is_zero()}))
    return report


def _monomials(nvars, degree):
    from .spaces import monomials_of_degree
    return list(monomials_of_degree(nvars, degree))


def make_poly_probe_space(P: PolyAlgebra, ctx: ParameterContext):
    from .spaces import Component, GradedSpace, MonomialBasis
    return GradedSpace(ctx, {"p": Component(0, MonomialBasis(P.nvars, 10 * (P.degree_cap + 1)))},
                       name="probe")


def _star_sp(P, ctx, a, b, swapped=False):
    """Star product where one side is already series-valued."""
    from .models import _series_poly_mul
    sa = a if isinstance(next(iter(a.values()), None), MultiSeries) else \
        {m: MultiSeries.constant(ctx, c) for m, c in a.items()}
    sb = b if isinstance(next(iter(b.values()), None), MultiSeries) else \
        {m: MultiSeries.constant(ctx, c) for m, c in b.items()}
    return _series_poly_mul(P, ctx, "t", sa, sb)


def closed_form_report(cfg: ModelConfig, model: WeylModel,
                       mbar: FlowSeries) -> Report:
    """m-bar at t = 0 equals the closed-form maps, order by order in s."""
    report = Report("closed-form-vs-flow")
    mbar_t0 = op_at_zero(mbar.assembled(), "t")
    max_arity = cfg.s_order + 2
    for n in range(2, max_arity + 1):
        closed = closed_form_m(model, n, "s")
        bank = monomial_tuple_bank(model.space, [n], cfg.degree_cap)
        for idxs in bank:
            lhs = mbar_t0.eval_indices(idxs)
            rhs = closed.eval_indices(idxs)
            report.add(f"n={n} " + " ".join(model.space.index_str(i) for i in idxs),
                       lhs - rhs)
    return report


def weyl_identity_report(cfg: ModelConfig, max_n: int = 3) -> Report:
    """m_{n+2}(a,b,1,...,1) = s^n a *_n b, checked on a widened window so the
    n = 3 instances are nonzero."""
    probe_cap = max(cfg.degree_cap, 2 * max_n)
    probe = ModelConfig(nvars=cfg.nvars, degree_cap=probe_cap,
                        omega=cfg.omega, s_order=cfg.s_order,
                        seed=cfg.seed,
                        param_caps={"t": probe_cap})
    model = probe.model()
    P, ctx, space = model.P, model.ctx, model.space
    report = Report("weyl-star-generalization")
    one_mod = BasisIndex(MOD, (0,) * P.nvars)
    for n in range(0, max_n + 1):
        closed = closed_form_m(model, n + 2, "s")
        s_pow = MultiSeries.variable(ctx, "s", n) if n else MultiSeries.one(ctx)
        for da in range(0, probe_cap + 1):
            for db in range(0, probe_cap + 1):
                if da + db - 2 * n < 0 or da + db - 2 * n > probe_cap \
                        or max(da, db) > probe_cap:
                    continue
                for ma in _monomials(P.nvars, da):
                    for mb in _monomials(P.nvars, db):
                        idxs = (BasisIndex(ALG, ma), BasisIndex(ALG, mb)) \
                            + (one_mod,) * n
                        value = closed.eval_indices(idxs)
                        star = P.star_k({ma: Fraction(1)}, {mb: Fraction(1)}, n)
                        expected = space.element(
                            {BasisIndex(ALG, m): s_pow.scaled(c)
                             for m, c in star.items()})
                        report.add(f"n={n} {ma}x{mb}", value - expected)
    return report


def m3_display_report(model: WeylModel) -> Report:
    """The three displayed arity-3 components, with their signs."""
    P, ctx, space = model.P, model.ctx, model.space
    report = Report("m3-components")
    closed = closed_form_m(model, 3, "s")
    s = MultiSeries.variable(ctx, "s")
    monos = [m for d in range(0, P.degree_cap + 1)
             for m in _monomials(P.nvars, d)]
    for ma in monos:
        for mb in monos:
            if sum(ma) + sum(mb) > P.degree_cap:
                continue
            star1 = P.star_k({ma: Fraction(1)}, {mb: Fraction(1)}, 1)
            for pattern, out_tag, sgn in (
                    ((ALG, ALG, MOD), ALG, 1),
                    ((ALG, MOD, MOD), MOD, 1),
                    ((MOD, ALG, MOD), MOD, -1)):
                idxs = (BasisIndex(pattern[0], ma), BasisIndex(pattern[1], mb),
                        BasisIndex(pattern[2], (0,) * P.nvars))
                value = closed.eval_indices(idxs)
                expected = space.element(
                    {BasisIndex(out_tag, m): s.scaled(c * sgn)
                     for m, c in star1.items()})
                report.add(f"{pattern} {ma}x{mb}", value - expected)
    return report


def local_finiteness_report_check(cfg: ModelConfig) -> Report:
    """Evaluated arity bound must be exactly 2+k at s-order k; the witness
    window is widened so every order has a nonzero witness."""
    probe_cap = max(cfg.degree_cap, 2 * cfg.s_order)
    probe = ModelConfig(nvars=cfg.nvars, degree_cap=probe_cap, omega=cfg.omega,
                        s_order=cfg.s_order, seed=cfg.seed,
                        param_caps={"t": probe_cap})
    model = probe.model()
    flow = integrate_flow(model.family, CupWord.monomial(("t", "u")), "s",
                          cfg.s_order)
    witnesses = []
    P = model.P
    for da in range(probe_cap + 1):
        for db in range(probe_cap + 1):
            if da + db > probe_cap:
                continue
            ma = tuple([da] + [0] * (P.nvars - 1))
            mb = tuple([0, db] + [0] * (P.nvars - 2))
            for pad in range(0, cfg.s_order + 1):
                witnesses.append((BasisIndex(ALG, ma), BasisIndex(ALG, mb))
                                 + (BasisIndex(MOD, (0,) * P.nvars),) * pad)
    entries = local_finiteness_report(flow, cfg.s_order, witnesses)
    report = Report("local-finiteness")
    space = model.space
    for k, entry in enumerate(entries):
        ok = entry.arity_bound == 2 + k
        residual = space.zero_element() if ok else \
            space.basis_element(space.basis_indices()[0])
        report.add(f"{entry.label}: arity {entry.arity_bound} "
                   f"(support <= {entry.support_bound})", residual)
    return report


SUITES = {
    "braces": lambda cfg: braces_suite(cfg.seed, cfg.tuple_len),
    "derived": derived_suite,
    "family": family_suite,
    "example": example_suite,
}
