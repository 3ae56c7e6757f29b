import numpy as np
import pytest

from bplab.densities import flat_improper, pushforward, reciprocal_map, uniform_box
from bplab.forward import (graph_restrict, linear, one_block,
                           two_block, two_ray_slowness, two_ray_velocity)
from bplab.units import METER, SECOND, SLOWNESS


class TestApply:
    def test_one_block(self):
        assert one_block(1.0).apply((0.5,)) == (1.0, 1.0)

    def test_two_block(self):
        d = two_block(1.0).apply((0.5, 0.7))
        assert d == pytest.approx((1.2, 1.0))

    def test_two_block_reduces_to_one_block_on_diagonal(self):
        s = 0.37
        assert two_block(2.5).apply((s, s)) == pytest.approx(one_block(2.5).apply((s,)))

    def test_linear(self):
        assert linear(3.0).apply((2.0,)) == (6.0,)

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            one_block().apply((0.5, 0.6))

    def test_velocity_is_slowness_after_reciprocal(self):
        gv, gs = two_ray_velocity(2.0), two_ray_slowness(2.0)
        for v in [(2.0, 4.0), (1.3, 0.8)]:
            assert gv.apply(v) == gs.apply((1 / v[0], 1 / v[1]))

    def test_velocity_near_zero_rejected(self):
        with pytest.raises(ValueError):
            two_ray_velocity().apply((1e-12, 1.0))

    def test_ray_matrix_must_be_invertible(self):
        with pytest.raises(ValueError):
            two_ray_slowness(1.0, ((1, 1), (1, 1)))


def test_declared_units_consistent_with_map():
    gs = two_ray_slowness(1.0)
    assert gs.m_units == (SLOWNESS, SLOWNESS)
    assert gs.d_units == (SECOND, SECOND)
    for mu, du in zip(gs.m_units, gs.d_units):
        assert METER * mu == du


class TestGraphRestrict:
    def setup_method(self):
        self.gv = two_ray_velocity(1.0)
        self.model_prior = uniform_box([(1, 5), (1, 5)], units=(SLOWNESS**-1,) * 2)
        self.data_prior = uniform_box([(0.5, 1.6), (0.5, 1.6)], units=(SECOND,) * 2)

    def test_constant_on_restriction(self):
        r = graph_restrict(self.data_prior, self.model_prior, self.gv)
        inside = [(2.0, 2.0), (3.0, 2.5), (1.5, 1.5)]
        vals = [r(v) for v in inside]
        assert all(v > 0 for v in vals)
        assert max(vals) == pytest.approx(min(vals), rel=1e-14)
        # outside the data preimage but inside the model box
        assert r((4.9, 4.9)) == 0.0
        # outside the model box
        assert r((0.5, 2.0)) == 0.0

    def test_improper_flat_likelihood_returns_prior(self):
        r = graph_restrict(flat_improper(2, units=(SECOND,) * 2),
                           self.model_prior, self.gv)
        for v in [(1.5, 4.0), (2.2, 3.3)]:
            assert r(v) == pytest.approx(self.model_prior(v), rel=1e-14)

    def test_slowness_restriction_shape(self):
        gs = two_ray_slowness(1.0)
        prior_s = pushforward(self.model_prior, reciprocal_map(2))
        r = graph_restrict(self.data_prior, prior_s, gs)
        pts = [(0.4, 0.4), (0.5, 0.3), (0.3, 0.6)]
        vals = [r(s) for s in pts]
        assert all(v > 0 for v in vals)
        ref = vals[0] * (0.4 ** -2 * 0.4 ** -2) ** -1
        for s, v in zip(pts, vals):
            assert v == pytest.approx(ref * s[0] ** -2 * s[1] ** -2, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            graph_restrict(self.data_prior, uniform_box([(0, 1)]), self.gv)

    def test_unit_bookkeeping(self):
        r = graph_restrict(self.data_prior, self.model_prior, self.gv)
        assert r.scale_unit == SECOND**-2

    def test_reparameterization_consistency(self):
        """Restricting in slowness coordinates and pushing to velocity equals
        restricting in velocity coordinates directly."""
        gs = two_ray_slowness(1.0)
        prior_s = pushforward(self.model_prior, reciprocal_map(2))
        r_s = graph_restrict(self.data_prior, prior_s, gs)
        r_v_direct = graph_restrict(self.data_prior, self.model_prior, self.gv)
        r_v_via_s = pushforward(r_s, reciprocal_map(2))
        grid = np.linspace(1.1, 4.9, 9)
        for a in grid:
            for b in grid:
                direct = r_v_direct((a, b))
                via = r_v_via_s((a, b))
                if direct == 0.0:
                    assert via == pytest.approx(0.0, abs=1e-15)
                else:
                    assert via == pytest.approx(direct, rel=1e-8)
