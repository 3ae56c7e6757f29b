"""Analytic-vs-oracle regression suite.

A registry of named integrals covering the integrands the other modules rely
on, each checked by adaptive quadrature against its exact value (wherever one
exists) and against a seeded Monte Carlo estimate.  The ``fast`` level runs
quadrature-only checks of every demo's closed forms; ``full`` adds the
million-step chain oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import conditioning, hierarchical, oracle, transdim
from .densities import gaussian_iid, pushforward, reciprocal_map
from .forward import linear


@dataclass(frozen=True)
class NamedIntegral:
    name: str
    fn: Callable
    box: tuple                      # quadrature box (may be infinite)
    mc_box: tuple                   # finite box for the Monte Carlo check
    exact: Optional[float] = None
    rel_tol: float = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _hier_cell(k: float, lam: float, delta: float) -> Callable:
    cfg = hierarchical.HierConfig(k=k)
    return lambda x: hierarchical.posterior_unnormalized(cfg, x[0], lam, delta)


def _gauss_ev2_kernel(sd: float, ss: float) -> Callable:
    def fn(m):
        s1, s2 = m
        q = ((s1 + s2) ** 2 + 4 * s1 * s1) / (sd * sd) + (s1 * s1 + s2 * s2) / (ss * ss)
        return math.exp(-0.5 * q) / (4 * math.pi ** 2 * sd * sd * ss * ss)
    return fn


def named_integrals() -> list[NamedIntegral]:
    """The regression registry; every integrand family used elsewhere."""
    inf = math.inf
    ucfg = transdim.UniformExampleConfig()
    tcfg = conditioning.TomographyConfig()
    p_v = conditioning.velocity_posterior(tcfg)
    p_s = pushforward(p_v, reciprocal_map(2))
    g_ev = transdim.gaussian_evidences(transdim.GaussianExampleConfig(1.0, 1.0))
    g_ev21 = transdim.gaussian_evidences(transdim.GaussianExampleConfig(2.0, 1.0))

    def printed_indicator(x):
        s1, s2 = x
        return 1.0 if (1.0 < s1 + s2 < 1.2 and 1.0 < 2 * s1 < 1.2) else 0.0

    def one_block_indicator(x):
        t = 2.0 * x[0]
        return 1.0 if (1.05 < t < 1.15) else 0.0

    def printed_width(x):
        s1 = x[0]
        if not 0.5 < s1 < 0.6:
            return 0.0
        return max(0.0, min(1.2 - s1, 10.0) - max(1.0 - s1, 0.0))

    hier_cells = [
        ("hier-cell-11", _hier_cell(1.0, 1.0, 1.0),
         0.25 * (1 / (2 * math.pi)) * math.sqrt(2 * math.pi / 2)),
        ("hier-cell-21", _hier_cell(1.0, 2.0, 1.0),
         0.25 * (1 / (4 * math.pi)) * math.sqrt(8 * math.pi / 5)),
        ("hier-cell-12", _hier_cell(1.0, 1.0, 2.0),
         0.25 * (1 / (4 * math.pi)) * math.sqrt(8 * math.pi / 5)),
        ("hier-cell-22", _hier_cell(1.0, 2.0, 2.0),
         0.25 * (1 / (8 * math.pi)) * math.sqrt(8 * math.pi / 2)),
    ]

    entries = [
        NamedIntegral("unit-box-constant", lambda x: 1.0,
                      ((0, 1), (0, 1)), ((0, 1), (0, 1)), 1.0),
        NamedIntegral("linear-ramp", lambda x: x[0], ((0, 1),), ((0, 1),), 0.5,
                      rel_tol=1e-12),
        NamedIntegral("gaussian-kernel-9", lambda x: math.exp(-4.5 * x[0] ** 2),
                      ((-inf, inf),), ((-6, 6),), math.sqrt(2 * math.pi) / 3),
        NamedIntegral("std-normal-mass", lambda x: gaussian_iid(0, 1)( (x[0],) ),
                      ((-inf, inf),), ((-8, 8),), 1.0),
        NamedIntegral("reciprocal-square", lambda x: x[0] ** -2,
                      ((0.5, 1.0),), ((0.5, 1.0),), 1.0),
        NamedIntegral("reciprocal-quartic", lambda x: x[0] ** -4,
                      ((1.0, 2.0),), ((1.0, 2.0),), 7.0 / 24.0),
        NamedIntegral("two-block-support-area-printed", printed_indicator,
                      ((0.3, 0.8), (0.2, 0.9)), ((0.3, 0.8), (0.2, 0.9)),
                      0.02, rel_tol=2e-4),
        NamedIntegral("two-block-support-width-reduction", printed_width,
                      ((0.4, 0.7),), ((0.4, 0.7),), 0.02, rel_tol=1e-10),
        NamedIntegral("one-block-support-length", one_block_indicator,
                      ((0.0, 10.0),), ((0.0, 10.0),), 0.05, rel_tol=1e-9),
        NamedIntegral("gaussian-evidence-k1", lambda x: (
            math.exp(-4 * x[0] ** 2) / (2 * math.pi)
            * math.exp(-0.5 * x[0] ** 2) / math.sqrt(2 * math.pi)),
            ((-inf, inf),), ((-6, 6),), g_ev[1]),
        NamedIntegral("gaussian-evidence-k2", _gauss_ev2_kernel(1.0, 1.0),
                      ((-inf, inf), (-inf, inf)), ((-6, 6), (-6, 6)), g_ev[2]),
        NamedIntegral("gaussian-evidence-k2-wide-noise", _gauss_ev2_kernel(2.0, 1.0),
                      ((-inf, inf), (-inf, inf)), ((-8, 8), (-8, 8)), g_ev21[2]),
        NamedIntegral("misfit-evidence-lam2-d5", lambda x: (
            math.exp(-0.5 * (x[0] - 5.0) ** 2 / 4.0) / (2 * math.sqrt(2 * math.pi))
            * gaussian_iid(0, 1)((x[0],))),
            ((-inf, inf),), ((-8, 13),),
            math.exp(-2.5) / math.sqrt(10 * math.pi)),
        NamedIntegral("velocity-posterior-mass", p_v,
                      p_v.support, p_v.support, None),
        NamedIntegral("slowness-posterior-mass", p_s,
                      p_s.support, p_s.support, None),
        NamedIntegral("velocity-diagonal-restriction",
                      lambda x: p_v((x[0], x[0])), ((1.0, 5.0),), ((1.0, 5.0),),
                      (4.0 - 1.25) / (16.0 * 1.21), rel_tol=1e-9),
        NamedIntegral("slowness-diagonal-restriction",
                      lambda x: x[0] ** -4 if 0.25 < x[0] < 0.8 else 0.0,
                      ((0.2, 1.0),), ((0.2, 1.0),),
                      (0.25 ** -3 - 0.8 ** -3) / 3.0, rel_tol=1e-9),
        NamedIntegral("gaussian-diagonal-kernel", lambda x: math.exp(-x[0] ** 2),
                      ((-inf, inf),), ((-6, 6),), math.sqrt(math.pi)),
        NamedIntegral("uniform-evidence-k1", lambda x: (
            one_block_indicator(x) / (10.0 * ucfg.d_area)),
            ((0.0, 10.0),), ((0.0, 10.0),),
            transdim.uniform_evidences_analytic(ucfg)[1], rel_tol=1e-9),
        NamedIntegral("likelihood-evidence-k1", lambda x: (
            one_block_indicator(x) / ucfg.d_area),
            ((0.0, 10.0),), ((0.0, 10.0),), 0.05 / ucfg.d_area, rel_tol=1e-9),
    ]
    entries.extend(
        NamedIntegral(name, fn, ((-inf, inf),), ((-8, 8),), exact)
        for name, fn, exact in hier_cells
    )
    return entries


def check_named_integrals(seed: int = 2026, mc_n: int = 100_000) -> list[CheckResult]:
    """Quadrature vs exact values and vs Monte Carlo, per registry entry."""
    results = []
    for i, entry in enumerate(named_integrals()):
        quad_tol = max(1e-10, 0.01 * entry.rel_tol)
        quad = oracle.quad_integrate(entry.fn, entry.box, rel_tol=quad_tol)
        ok = True
        parts = []
        if entry.exact is not None:
            rel = abs(quad.value - entry.exact) / abs(entry.exact)
            ok &= rel <= entry.rel_tol
            parts.append(f"quad rel err {rel:.2e} (tol {entry.rel_tol:.0e})")
        if entry.mc_box == entry.box:
            quad_mc_box = quad
        else:
            quad_mc_box = oracle.quad_integrate(entry.fn, entry.mc_box, rel_tol=quad_tol)
        mc = oracle.mc_integrate(entry.fn, entry.mc_box, mc_n, seed + i)
        band = 3.0 * (mc.error + quad_mc_box.error + abs(entry.rel_tol * quad.value)) + 1e-12
        ok &= abs(mc.value - quad_mc_box.value) <= band
        parts.append(f"|mc-quad| {abs(mc.value - quad_mc_box.value):.2e} <= {band:.2e}")
        results.append(CheckResult(f"integral/{entry.name}", ok, "; ".join(parts)))
    return results


def check_demos_fast(seed: int = 2026) -> list[CheckResult]:
    """Closed forms of every demo against their quadrature/geometry oracles."""
    results = []

    rep = conditioning.borel_contradiction_report(conditioning.TomographyConfig())
    results.append(CheckResult(
        "borel/contradiction",
        rep.constant_ok and rep.exponent_ok and rep.contradiction,
        f"constancy {rep.constancy_deviation:.2e}, exponent {rep.ratio_exponent:.4f}"))

    cfg = hierarchical.HierConfig()
    worst = 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(20):
        c = hierarchical.HierConfig(pi_lambda=float(rng.uniform(0.05, 0.95)),
                                    pi_delta=float(rng.uniform(0.05, 0.95)),
                                    k=float(rng.uniform(0.2, 3.0)))
        tp = hierarchical.theta_posterior(c)
        for i, lam in enumerate(c.lambda_atoms):
            for j, dl in enumerate(c.delta_atoms):
                q = oracle.quad_integrate(
                    lambda x: hierarchical.posterior_unnormalized(c, x[0], lam, dl),
                    [(-math.inf, math.inf)], rel_tol=1e-12)
                closed = tp.probs[i, j] * tp.normalization
                worst = max(worst, abs(q.value - closed) / closed)
    results.append(CheckResult("hierarchical/cells-vs-quadrature", worst <= 1e-8,
                               f"worst rel err {worst:.2e}"))

    probe = hierarchical.acausality_probe(cfg, [0.5, 1.0, 2.0])
    results.append(CheckResult("hierarchical/acausality", probe.acausal
                               and probe.variation_lambda > 0.01,
                               f"variation {probe.variation_lambda:.4f}"))

    ok_misfit = True
    details = []
    prior = gaussian_iid(0.0, 1.0, 1)
    for d in (2.0, 5.0, 8.0):
        r = hierarchical.misfit_lambda_estimator(d, linear(1.0), prior, (1e-3, 20.0))
        err = abs(r.lambda_star - math.sqrt(d * d - 1))
        ok_misfit &= err <= 1e-4
        details.append(f"d={d:g}: {err:.1e}")
    results.append(CheckResult("misfit/analytic-optimum", ok_misfit, ", ".join(details)))

    ucfg = transdim.UniformExampleConfig()
    urep = transdim.uniform_example_report(ucfg, seed=seed)
    ana = transdim.uniform_evidences_analytic(ucfg)
    geo = transdim.uniform_evidences_geometry(ucfg)
    rel = max(abs(ana[k] - geo[k]) / ana[k] for k in (1, 2))
    mc_ok = abs(urep.mc_area - urep.area_as_printed) <= 3 * urep.mc_area_se
    results.append(CheckResult("transdim-uniform/analytic-vs-geometry",
                               rel <= 1e-6 and mc_ok,
                               f"rel {rel:.2e}, mc dev {abs(urep.mc_area - urep.area_as_printed):.2e}"))

    gcfg = transdim.GaussianExampleConfig(1.0, 1.0)
    grep = transdim.gaussian_example_report(gcfg)
    bf_closed = transdim.gaussian_bayes_factor(gcfg)
    prob = transdim.gaussian_problem(gcfg)
    quad_bf = (transdim.conditional_evidence(prob, 2).value
               / transdim.conditional_evidence(prob, 1).value)
    rel_bf = abs(bf_closed - quad_bf) / quad_bf
    results.append(CheckResult("transdim-gaussian/bf-vs-quadrature",
                               rel_bf <= 1e-8 and max(grep.quadrature_rel_err.values()) <= 1e-8,
                               f"bf rel err {rel_bf:.2e}"))

    m = transdim.fig7_region_map(np.linspace(0.2, 3.0, 29), np.linspace(0.2, 3.0, 29))
    step = (3.0 - 0.2) / 28
    boundary_ok = all(abs(d - math.sqrt(2) * s) <= step + 1e-12 for s, d in m.boundary)
    results.append(CheckResult("transdim-gaussian/preference-boundary",
                               boundary_ok and len(m.boundary) > 0,
                               f"{len(m.boundary)} boundary cells within one step"))

    c = 1000.0
    ucfg_r = transdim.UniformExampleConfig(
        length=ucfg.length / c, s_min=ucfg.s_min * c, s_max=ucfg.s_max * c,
        d1=ucfg.d1, d2=ucfg.d2)
    bf0 = transdim.uniform_bayes_factor(ucfg)
    bf1 = transdim.uniform_bayes_factor(ucfg_r)
    r0 = transdim.likelihood_evidence_ratio(transdim.uniform_problem(ucfg), 2, 1)
    r1 = transdim.likelihood_evidence_ratio(transdim.uniform_problem(ucfg_r), 2, 1)
    results.append(CheckResult(
        "units/rescale-audit",
        abs(bf1 - bf0) <= 1e-12 * bf0
        and abs(r1.value / r0.value - c) / c <= 1e-9
        and not r0.is_dimensionless,
        f"bf drift {abs(bf1 - bf0):.2e}, ratio scale {r1.value / r0.value:.6f}"))

    return results


def check_chains_full(seed: int = 2026, steps: int = 1_000_000) -> list[CheckResult]:
    """Million-step sampler oracles against the analytic dimension marginals."""
    results = []

    gcfg = transdim.GaussianExampleConfig(1.0, 1.0)
    chain = oracle.rj_mcmc(transdim.gaussian_problem(gcfg), steps, seed)
    p2, se = chain.k_frequency(2), chain.k_frequency_se(2, n_batches=50)
    expect = transdim.gaussian_marginals(gcfg)[2]
    results.append(CheckResult("rj/gaussian-k-marginal",
                               abs(p2 - expect) <= 3 * se,
                               f"p2 {p2:.5f} vs {expect:.5f} (3se {3 * se:.5f})"))

    ucfg = transdim.UniformExampleConfig()
    chain = oracle.rj_mcmc(transdim.uniform_problem(ucfg), steps, seed + 1,
                           targets=transdim.uniform_printed_targets(ucfg))
    p2, se = chain.k_frequency(2), chain.k_frequency_se(2, n_batches=50)
    expect = transdim.uniform_printed_marginals(ucfg)[2]
    results.append(CheckResult("rj/uniform-k-marginal",
                               abs(p2 - expect) <= 3 * se,
                               f"p2 {p2:.5f} vs {expect:.5f} (3se {3 * se:.5f})"))

    mh = oracle.metropolis(lambda x: math.exp(-0.5 * x[0] ** 2), (0.0,), steps,
                           1.0, seed + 2)
    xs = mh.coords[:, 0]
    n_b = 100
    cut = (len(xs) // n_b) * n_b
    means = xs[:cut].reshape(n_b, -1).mean(axis=1)
    se_mean = means.std(ddof=1) / math.sqrt(n_b)
    results.append(CheckResult("metropolis/std-normal-moments",
                               abs(xs.mean()) <= 3 * se_mean
                               and abs(xs.var() - 1.0) <= 0.02,
                               f"mean {xs.mean():.4f} (3se {3 * se_mean:.4f}), var {xs.var():.4f}"))
    return results


def run_verification(level: str, seed: int = 2026) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("verification level must be 'fast' or 'full'")
    results = check_named_integrals(seed) + check_demos_fast(seed)
    if level == "full":
        results += check_chains_full(seed)
    return results
