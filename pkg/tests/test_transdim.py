import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bplab.densities import DiscreteDistribution, flat_improper, uniform_box
from bplab.forward import one_block
from bplab.transdim import (DimensionedComparisonError,
                            EmptyDataIntersectionWarning, GaussianExampleConfig,
                            ModelHypothesis, TransDimProblem,
                            UniformExampleConfig, bayes_factor,
                            conditional_evidence, fig7_region_map,
                            gaussian_bayes_factor, gaussian_evidences,
                            gaussian_example_report, gaussian_problem,
                            likelihood_evidence, likelihood_evidence_ratio,
                            parsimony_flip, posterior_odds, total_evidence,
                            uniform_bayes_factor, uniform_evidences_analytic,
                            uniform_evidences_geometry, uniform_example_report,
                            uniform_printed_marginals, uniform_problem)
from bplab.units import SECOND, SLOWNESS


@pytest.fixture(scope="module")
def ucfg():
    return UniformExampleConfig()


@pytest.fixture(scope="module")
def uprob(ucfg):
    return uniform_problem(ucfg)


class TestConditionalEvidence:
    def test_uniform_k1_closed_form(self, ucfg, uprob):
        ev = conditional_evidence(uprob, 1, rel_tol=1e-9)
        expect = uniform_evidences_analytic(ucfg)[1]
        assert ev.value == pytest.approx(expect, rel=1e-8)
        assert ev.unit == SECOND ** -2

    def test_zero_likelihood_gives_zero(self):
        cfg = UniformExampleConfig(s_min=5.0, s_max=10.0)  # 2Ls >= 10 misses data
        prob = uniform_problem(cfg)
        assert conditional_evidence(prob, 1).value == 0.0

    def test_gaussian_k1_sixth_pi(self):
        prob = gaussian_problem(GaussianExampleConfig(1.0, 1.0))
        ev = conditional_evidence(prob, 1, rel_tol=1e-10)
        assert ev.value == pytest.approx(1.0 / (6.0 * math.pi), rel=1e-9)

    def test_improper_data_prior_rejected(self):
        prior = uniform_box([(-1e6, 1e6)], units=(SLOWNESS,))
        prob = TransDimProblem(
            hypotheses=(ModelHypothesis(1, one_block(1.0), prior),),
            data_prior=flat_improper(2, units=(SECOND, SECOND)),
            p_k=DiscreteDistribution(((1, 1.0),)))
        ev = conditional_evidence(prob, 1)  # finite box: fine
        assert ev.value > 0


class TestTotalEvidenceAndOdds:
    def test_equal_evidences_collapse(self):
        prob = gaussian_problem(GaussianExampleConfig(1.0, 1.0))
        ev1 = conditional_evidence(prob, 1).value
        # p_k = (1, 0) makes the total the k=1 evidence
        prob10 = gaussian_problem(GaussianExampleConfig(1.0, 1.0),
                                  p_k=DiscreteDistribution(((1, 1.0), (2, 0.0))))
        assert total_evidence(prob10).value == pytest.approx(ev1, rel=1e-10)

    def test_uniform_total_matches_direct_sum_quadrature(self, ucfg, uprob):
        """Total evidence vs brute-force integration over the 1-D plus 2-D
        direct-sum model space."""
        total = 0.5 * uniform_evidences_analytic(ucfg)[1] + \
            0.5 * uniform_evidences_analytic(ucfg)[2]
        geo = uniform_evidences_geometry(ucfg)
        brute = 0.5 * geo[1] + 0.5 * geo[2]
        assert total == pytest.approx(brute, rel=1e-6)

    def test_posterior_odds_identity_exact(self, uprob):
        assert posterior_odds(uprob, 2, 1) == bayes_factor(uprob, 2, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(1e-8, 1e3), st.floats(1e-8, 1e3))
    def test_odds_identity_property(self, pk1, e1, e2):
        # odds = bf * prior odds holds exactly for any evidences
        bf = e1 / e2
        odds = bf * (pk1 / (1 - pk1))
        assert odds == bf * (pk1 / (1 - pk1))

    def test_excluded_hypothesis_raises(self):
        cfg = UniformExampleConfig(s_min=5.0, s_max=10.0)
        prob = uniform_problem(cfg)
        with pytest.raises(ZeroDivisionError, match="excluded"):
            bayes_factor(prob, 2, 1)

    def test_identical_models_factor_one(self):
        # k is only a label; registering the same model twice gives factor 1
        prior = uniform_box([(0.0, 1.0)], units=(SLOWNESS,))
        prob = TransDimProblem(
            hypotheses=(ModelHypothesis(1, one_block(1.0), prior),
                        ModelHypothesis(2, one_block(1.0), prior)),
            data_prior=uniform_box([(1.0, 1.2), (1.05, 1.15)],
                                   units=(SECOND, SECOND)),
            p_k=DiscreteDistribution(((1, 0.5), (2, 0.5))))
        assert bayes_factor(prob, 2, 1) == pytest.approx(1.0, rel=1e-10)

    def test_two_equal_evidences_total_collapses(self):
        prior = uniform_box([(0.0, 1.0)], units=(SLOWNESS,))
        prob = TransDimProblem(
            hypotheses=(ModelHypothesis(1, one_block(1.0), prior),
                        ModelHypothesis(2, one_block(1.0), prior)),
            data_prior=uniform_box([(1.0, 1.2), (1.05, 1.15)],
                                   units=(SECOND, SECOND)),
            p_k=DiscreteDistribution(((1, 0.5), (2, 0.5))))
        e = conditional_evidence(prob, 1).value
        assert total_evidence(prob).value == pytest.approx(e, rel=1e-9)


class TestUniformExample:
    def test_default_report_values(self, ucfg):
        rep = uniform_example_report(ucfg, seed=3)
        assert rep.regime == "analytic"
        assert rep.bayes_factor_21 == pytest.approx(0.04, abs=1e-12)
        assert rep.evidences[1] == pytest.approx(0.25, rel=1e-12)
        assert rep.evidences[2] == pytest.approx(0.01, rel=1e-12)
        assert rep.area_as_printed == pytest.approx(0.02, abs=1e-12)
        assert rep.area_component_correct == pytest.approx(0.01, abs=1e-12)
        assert abs(rep.mc_area - 0.02) <= 3 * rep.mc_area_se
        assert rep.posterior_odds_21 == rep.bayes_factor_21

    def test_flip_construction_bf_2(self, ucfg):
        cfg2 = replace(ucfg, s_min=0.45, s_max=0.65)
        assert uniform_bayes_factor(cfg2) == pytest.approx(2.0, rel=1e-12)

    def test_identical_interval_cancellation(self):
        cfg = UniformExampleConfig(d1=(1.0, 1.2), d2=(1.0, 1.2), s_min=0.0, s_max=2.0)
        # d_hat == d1, so the factor (d1 width) cancels once
        expect = (1.2 - 1.0) / (1.0 * 2.0)
        assert uniform_bayes_factor(cfg) == pytest.approx(expect, rel=1e-12)

    def test_truncated_regime_tagged(self):
        cfg = UniformExampleConfig(s_min=0.45, s_max=0.65)
        rep = uniform_example_report(cfg, seed=4)
        assert rep.regime == "truncated-quadrature"
        assert rep.coverage == {1: True, 2: False}
        # quadrature evidences: clipped support
        geo = uniform_evidences_geometry(cfg)
        assert rep.evidences[2] == pytest.approx(geo[2], rel=1e-10)
        assert rep.bayes_factor_21 < 2.0

    def test_empty_intersection_warns(self):
        cfg = UniformExampleConfig(d1=(1.0, 1.2), d2=(1.5, 1.7))
        with pytest.warns(EmptyDataIntersectionWarning):
            rep = uniform_example_report(cfg, seed=5)
        assert rep.empty_intersection
        assert rep.evidences[1] == 0.0

    def test_prior_sensitivity_scaling_law(self, ucfg):
        """Widening the slowness range by alpha divides the factor by alpha."""
        bf0 = uniform_bayes_factor(ucfg)
        for alpha in (2.0, 10.0):
            wide = replace(ucfg, s_max=ucfg.s_min + alpha * (ucfg.s_max - ucfg.s_min))
            assert uniform_bayes_factor(wide) == pytest.approx(bf0 / alpha, rel=1e-12)

    def test_bf_matches_mc_oracle(self, ucfg):
        rep = uniform_example_report(ucfg, seed=6, mc_n=400_000)
        srange = ucfg.s_max - ucfg.s_min
        ev2_mc = rep.mc_area / (srange ** 2 * ucfg.d_area)
        bf_mc = ev2_mc / rep.evidences[1]
        se = rep.mc_area_se / (srange ** 2 * ucfg.d_area) / rep.evidences[1]
        assert abs(bf_mc - rep.bayes_factor_21) <= 3 * se


class TestParsimonyFlip:
    def test_default_pair(self, ucfg):
        flip = parsimony_flip(ucfg)
        assert flip.bf_wide == pytest.approx(0.04, abs=1e-12)
        assert flip.bf_narrow == pytest.approx(2.0, abs=1e-12)
        assert flip.bf_wide < 1.0 < flip.bf_narrow
        assert max(flip.certificate_sup.values()) <= 1e-10
        assert max(flip.valid_certificate_sup.values()) <= 1e-10
        assert flip.bf_narrowest_valid == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert flip.narrow_coverage == {1: True, 2: False}

    def test_identical_observations_rejected(self):
        cfg = UniformExampleConfig(d1=(1.0, 1.2), d2=(1.0, 1.2))
        with pytest.raises(ValueError, match="identical observations"):
            parsimony_flip(cfg)

    def test_base_must_cover(self):
        cfg = UniformExampleConfig(s_min=0.45, s_max=0.65)
        with pytest.raises(ValueError, match="cover"):
            parsimony_flip(cfg)


class TestGaussianExample:
    def test_unit_sigma_bf(self):
        assert gaussian_bayes_factor(GaussianExampleConfig(1.0, 1.0)) == \
            pytest.approx(math.sqrt(9.0 / 11.0), abs=1e-15)

    def test_wide_noise_flips_preference(self):
        b = gaussian_bayes_factor(GaussianExampleConfig(2.0, 1.0))
        assert b == pytest.approx(math.sqrt(48.0 / 44.0), abs=1e-15)
        assert b > 1.0

    def test_narrow_prior_limit_is_one(self):
        b = gaussian_bayes_factor(GaussianExampleConfig(1.0, 1e-4))
        assert b == pytest.approx(1.0, abs=1e-6)

    def test_report_cross_checked(self):
        rep = gaussian_example_report(GaussianExampleConfig(1.0, 1.0))
        assert max(rep.quadrature_rel_err.values()) <= 1e-8
        assert rep.bayes_factor_21 == pytest.approx(math.sqrt(9 / 11), abs=1e-15)

    def test_evidences_closed_form_vs_quadrature(self):
        cfg = GaussianExampleConfig(1.7, 0.4)
        prob = gaussian_problem(cfg)
        closed = gaussian_evidences(cfg)
        for k in (1, 2):
            q = conditional_evidence(prob, k, rel_tol=1e-10)
            assert q.value == pytest.approx(closed[k], rel=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.5, 20.0))
    def test_scale_invariance_property(self, sd, ss, c):
        b1 = gaussian_bayes_factor(GaussianExampleConfig(sd, ss))
        b2 = gaussian_bayes_factor(GaussianExampleConfig(c * sd, c * ss))
        assert b2 == pytest.approx(b1, rel=1e-12)

    def test_monotone_decreasing_in_prior_width(self):
        cfgs = [GaussianExampleConfig(1.0, a) for a in (2.0, 4.0, 8.0, 16.0)]
        bs = [gaussian_bayes_factor(c) for c in cfgs]
        assert all(b1 > b2 for b1, b2 in zip(bs, bs[1:]))

    def test_positive_inputs_required(self):
        with pytest.raises(ValueError):
            GaussianExampleConfig(0.0, 1.0)


class TestFig7:
    def test_boundary_location(self):
        m = fig7_region_map(np.linspace(0.1, 3.0, 60), np.linspace(0.1, 3.0, 60))
        step = (3.0 - 0.1) / 59
        assert len(m.boundary) > 0
        for s, d in m.boundary:
            assert abs(d - math.sqrt(2) * s) <= step + 1e-12

    def test_exact_boundary_value(self):
        assert gaussian_bayes_factor(GaussianExampleConfig(math.sqrt(2), 1.0)) == \
            pytest.approx(1.0, abs=1e-10)

    def test_unit_cell_is_k1_region(self):
        m = fig7_region_map([1.0], [1.0])
        assert m.region[0, 0] == -1

    def test_positive_grids_required(self):
        with pytest.raises(ValueError):
            fig7_region_map([0.0, 1.0], [1.0])


class TestLikelihoodEvidence:
    def test_uniform_k1_value_and_unit(self, ucfg, uprob):
        le = likelihood_evidence(uprob, 1)
        expect = (1.0 / ucfg.d_area) * 0.1 / 2.0
        assert le.value == pytest.approx(expect, rel=1e-8)
        assert le.unit == SECOND ** -2 * SLOWNESS

    def test_cross_dimension_ratio_is_dimensioned(self, uprob):
        ratio = likelihood_evidence_ratio(uprob, 2, 1)
        assert not ratio.is_dimensionless
        assert ratio.unit == SLOWNESS
        with pytest.raises(DimensionedComparisonError):
            ratio.plain()

    def test_same_dimension_ratio_is_plain(self, uprob):
        ratio = likelihood_evidence_ratio(uprob, 1, 1)
        assert ratio.is_dimensionless
        assert ratio.plain() == pytest.approx(1.0, rel=1e-12)

    def test_flat_likelihood_rejected(self):
        prior = uniform_box([(0.0, 1.0)], units=(SLOWNESS,))
        prob = TransDimProblem(
            hypotheses=(ModelHypothesis(1, one_block(1.0), prior),),
            data_prior=flat_improper(2, units=(SECOND, SECOND)),
            p_k=DiscreteDistribution(((1, 1.0),)))
        with pytest.raises(ValueError, match="improper likelihood evidence"):
            likelihood_evidence(prob, 1)

    def test_unit_rescaling_audit(self, ucfg, uprob):
        """Changing the slowness unit by c leaves the standard factor alone
        and scales the cross-dimension likelihood-evidence ratio by c."""
        c = 1000.0
        resc = UniformExampleConfig(length=ucfg.length / c, s_min=ucfg.s_min * c,
                                    s_max=ucfg.s_max * c, d1=ucfg.d1, d2=ucfg.d2)
        assert uniform_bayes_factor(resc) == \
            pytest.approx(uniform_bayes_factor(ucfg), rel=1e-12)
        r0 = likelihood_evidence_ratio(uprob, 2, 1)
        r1 = likelihood_evidence_ratio(uniform_problem(resc), 2, 1)
        assert r1.value / r0.value == pytest.approx(c, rel=1e-9)


def test_standard_bayes_factor_always_dimensionless(uprob):
    # bayes_factor returns a plain float only because the units cancel
    bf = bayes_factor(uprob, 2, 1)
    assert isinstance(bf, float)
    e1 = conditional_evidence(uprob, 1)
    e2 = conditional_evidence(uprob, 2)
    assert (e2.unit / e1.unit).is_dimensionless


def test_printed_marginals_sum_to_one(ucfg):
    marg = uniform_printed_marginals(ucfg)
    assert marg[1] + marg[2] == pytest.approx(1.0, abs=1e-12)
    assert marg[2] / marg[1] == pytest.approx(0.04, rel=1e-12)


def test_clipped_area_against_polygon_oracle():
    """Third, fully independent route for the two-block support area:
    half-plane clipping with a computational-geometry library."""
    shapely = pytest.importorskip("shapely")
    from shapely.geometry import Polygon, box as shp_box

    rng = np.random.default_rng(13)
    for _ in range(10):
        L = float(rng.uniform(0.5, 2.0))
        a = float(rng.uniform(0.5, 1.5))
        w = float(rng.uniform(0.1, 0.5))
        cfg = UniformExampleConfig(length=L, s_min=0.0, s_max=3.0,
                                   d1=(a, a + w),
                                   d2=(a + 0.2 * w, a + 0.7 * w))
        big = 10.0
        # band between the lines s1 + s2 = a/L and s1 + s2 = (a+w)/L
        band = Polygon([(-big, a / L + big), (a / L + big, -big),
                        ((a + w) / L + big, -big), (-big, (a + w) / L + big)])
        strip = shp_box(a / (2 * L), -big, (a + w) / (2 * L), big)
        prior_box = shp_box(cfg.s_min, cfg.s_min, cfg.s_max, cfg.s_max)
        poly = band.intersection(strip).intersection(prior_box)
        from bplab.transdim import _area_k2_clipped
        mine = _area_k2_clipped(cfg, (cfg.s_min, cfg.s_max))
        assert mine == pytest.approx(poly.area, rel=1e-9)
