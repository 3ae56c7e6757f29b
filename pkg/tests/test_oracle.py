import math

import numpy as np
import pytest

from bplab.densities import DiscreteDistribution, pushforward, reciprocal_map
from bplab.conditioning import TomographyConfig, velocity_posterior
from bplab.oracle import (birth_accept_ratio,
                          death_accept_ratio, finite_difference_jacobian_det,
                          mc_integrate, metropolis, quad_integrate, rj_mcmc)
from bplab.transdim import (GaussianExampleConfig, UniformExampleConfig,
                            gaussian_marginals, gaussian_problem,
                            uniform_printed_marginals, uniform_printed_targets,
                            uniform_problem)


class TestQuadIntegrate:
    def test_linear_ramp(self):
        r = quad_integrate(lambda x: x[0], [(0, 1)], rel_tol=1e-12)
        assert r.value == pytest.approx(0.5, abs=1e-12)
        assert r.converged

    def test_gaussian_kernel_infinite(self):
        r = quad_integrate(lambda x: math.exp(-4.5 * x[0] ** 2),
                           [(-math.inf, math.inf)])
        assert r.value == pytest.approx(math.sqrt(2 * math.pi) / 3, rel=1e-10)

    def test_printed_support_area(self):
        def ind(x):
            return 1.0 if (1.0 < x[0] + x[1] < 1.2 and 1.0 < 2 * x[0] < 1.2) else 0.0
        r = quad_integrate(ind, [(0.3, 0.8), (0.2, 0.9)], rel_tol=1e-10)
        assert r.value == pytest.approx(0.02, rel=2e-4)

    def test_narrow_support_not_missed(self):
        # support ~0.5% of the box: far between plain quadrature nodes but
        # wider than the support-scan resolution
        r = quad_integrate(lambda x: 1.0 if 5.00 < x[0] < 5.51 else 0.0,
                           [(0.0, 100.0)])
        assert r.value == pytest.approx(0.51, rel=1e-6)

    def test_breakpoints_used(self):
        r = quad_integrate(lambda x: 1.0 if x[0] < 0.3 else 0.0, [(0, 1)],
                           points=[0.3], rel_tol=1e-12)
        assert r.value == pytest.approx(0.3, rel=1e-12)

    def test_error_field_nonnegative(self):
        r = quad_integrate(lambda x: x[0] ** 2, [(0, 2)])
        assert r.error >= 0 and r.n_evals > 0


class TestMcIntegrate:
    def test_constant_on_unit_box(self):
        r = mc_integrate(lambda x: 1.0, [(0, 1), (0, 1)], 10_000, seed=1)
        assert r.value == 1.0 and r.error == 0.0

    def test_rejection_area(self):
        def ind(x):
            return 1.0 if (1.0 < x[0] + x[1] < 1.2 and 1.0 < 2 * x[0] < 1.2) else 0.0
        r = mc_integrate(ind, [(0, 10), (0, 10)], 1_000_000, seed=2, vectorized=False)
        assert abs(r.value - 0.02) <= 3 * r.error

    def test_seed_repeatability(self):
        a = mc_integrate(lambda x: x[0] ** 2, [(0, 1)], 5_000, seed=33)
        b = mc_integrate(lambda x: x[0] ** 2, [(0, 1)], 5_000, seed=33)
        assert a.value == b.value and a.error == b.error

    def test_support_not_hit(self):
        with pytest.raises(ValueError, match="support not hit"):
            mc_integrate(lambda x: 0.0, [(0, 1)], 1_000, seed=3)

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            mc_integrate(lambda x: 1.0, [(0, 1)], 10, seed=4)


def test_finite_difference_jacobian():
    fd = finite_difference_jacobian_det(lambda x: (x[0] ** 2, 3 * x[1]), (2.0, 1.0))
    assert fd == pytest.approx(12.0, rel=1e-6)


class TestMetropolis:
    def test_standard_normal_moments(self):
        chain = metropolis(lambda x: math.exp(-0.5 * x[0] ** 2), (0.0,),
                           100_000, 1.0, seed=11)
        xs = chain.coords[:, 0]
        assert abs(xs.mean()) < 0.05
        assert xs.var() == pytest.approx(1.0, abs=0.05)
        assert 0.0 < chain.acceptance["walk"] < 1.0

    def test_zero_init_rejected(self):
        with pytest.raises(ValueError):
            metropolis(lambda x: 0.0, (0.0,), 100, 1.0, seed=1)

    def test_seeded_repeatability(self):
        a = metropolis(lambda x: math.exp(-abs(x[0])), (0.0,), 2_000, 0.7, seed=5)
        b = metropolis(lambda x: math.exp(-abs(x[0])), (0.0,), 2_000, 0.7, seed=5)
        assert np.array_equal(a.coords, b.coords)

    def test_slowness_posterior_marginal_vs_quadrature(self):
        """Bin frequencies of the first coordinate against the quadrature
        marginal, with batch-means errors to absorb chain autocorrelation."""
        p_s = pushforward(velocity_posterior(TomographyConfig()), reciprocal_map(2))
        chain = metropolis(p_s, (0.5, 0.5), 200_000, 0.15, seed=21)
        xs = chain.coords[20_000:, 0]   # drop burn-in
        z = quad_integrate(p_s, p_s.support, rel_tol=1e-9).value
        edges = np.linspace(0.3, 0.75, 7)
        n_b = 50
        cut = (len(xs) // n_b) * n_b
        blocks = xs[:cut].reshape(n_b, -1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            p_hat = np.mean((xs >= lo) & (xs < hi))
            per_block = ((blocks >= lo) & (blocks < hi)).mean(axis=1)
            se = per_block.std(ddof=1) / math.sqrt(n_b)
            expect = quad_integrate(p_s, [(lo, hi), p_s.support[1]],
                                    rel_tol=1e-8).value / z
            assert abs(p_hat - expect) <= 3 * se + 1e-3


class TestReversibleJump:
    def test_detailed_balance_three_state_toy(self):
        """Stationarity of the discrete analog of the jump kernel to 1e-10.

        States: x0 = (k=1, A), x1 = (k=2, (A, B)), x2 = (k=2, (A, C)).
        Births from x0 draw the extra coordinate from {B: q, C: 1-q}; deaths
        drop it.  The kernel uses the same acceptance-ratio functions as the
        sampler.
        """
        pk1, pk2 = 0.35, 0.65
        q = 0.3
        post = np.array([1.7, 0.6, 2.2])     # unnormalized within-k posteriors
        pi = np.array([post[0] * pk1, post[1] * pk2, post[2] * pk2])

        P = np.zeros((3, 3))
        # from x0: birth to x1 with proposal prob q, to x2 with 1-q
        a01 = min(1.0, birth_accept_ratio(post[1], post[0], pk2, pk1, q))
        a02 = min(1.0, birth_accept_ratio(post[2], post[0], pk2, pk1, 1 - q))
        P[0, 1] = q * a01
        P[0, 2] = (1 - q) * a02
        P[0, 0] = 1.0 - P[0, 1] - P[0, 2]
        # from x1 / x2: death back to x0 (dropped coordinate had pdf q / 1-q)
        a10 = min(1.0, death_accept_ratio(post[0], post[1], pk1, pk2, q))
        a20 = min(1.0, death_accept_ratio(post[0], post[2], pk1, pk2, 1 - q))
        P[1, 0] = a10
        P[1, 1] = 1.0 - a10
        P[2, 0] = a20
        P[2, 2] = 1.0 - a20

        stationary = pi @ P
        assert np.max(np.abs(stationary - pi)) <= 1e-10 * pi.max()

    def test_birth_ratio_reduces_to_likelihood_times_prior_odds(self):
        """With the extra coordinate drawn from the shared prior factor, the
        acceptance ratio is (likelihood ratio) * (prior odds of k)."""
        cfg = GaussianExampleConfig(1.0, 1.0)
        prob = gaussian_problem(cfg)
        f = prob.component_prior
        like1 = lambda m: prob.data_prior(prob.forward(1).apply(m))
        like2 = lambda m: prob.data_prior(prob.forward(2).apply(m))
        s1, u = 0.21, -0.4
        post1 = like1((s1,)) * prob.model_prior(1)((s1,))
        post2 = like2((s1, u)) * prob.model_prior(2)((s1, u))
        ratio = birth_accept_ratio(post2, post1, 0.5, 0.5, f((u,)))
        assert ratio == pytest.approx(like2((s1, u)) / like1((s1,)), rel=1e-12)

    def test_pk_degenerate_never_jumps(self):
        prob = gaussian_problem(GaussianExampleConfig(1.0, 1.0),
                                p_k=DiscreteDistribution(((1, 1.0), (2, 0.0))))
        chain = rj_mcmc(prob, 20_000, seed=7)
        assert chain.k_frequency(2) == 0.0

    def test_gaussian_marginal_short(self):
        cfg = GaussianExampleConfig(1.0, 1.0)
        chain = rj_mcmc(gaussian_problem(cfg), 200_000, seed=5)
        p2, se = chain.k_frequency(2), chain.k_frequency_se(2)
        assert abs(p2 - gaussian_marginals(cfg)[2]) <= 3 * se

    def test_uniform_printed_marginal_short(self):
        cfg = UniformExampleConfig()
        chain = rj_mcmc(uniform_problem(cfg), 400_000, seed=6,
                        targets=uniform_printed_targets(cfg))
        p2, se = chain.k_frequency(2), chain.k_frequency_se(2, n_batches=50)
        assert abs(p2 - uniform_printed_marginals(cfg)[2]) <= 3 * se

    def test_within_k_samples_match_fixed_dim_metropolis(self):
        cfg = GaussianExampleConfig(1.0, 1.0)
        prob = gaussian_problem(cfg)
        chain = rj_mcmc(prob, 200_000, seed=15)
        ones = chain.states_with_k(1)[:, 0]
        target = lambda x: (prob.model_prior(1)(x)
                            * prob.data_prior(prob.forward(1).apply(x)))
        fixed = metropolis(target, (0.0,), 100_000, 0.5, seed=16)
        fx = fixed.coords[:, 0]
        se = math.sqrt(fx.var() / 2000 + ones.var() / 2000)  # crude ess guess
        assert abs(ones.mean() - fx.mean()) <= 4 * se
        assert ones.std() == pytest.approx(fx.std(), rel=0.1)

    def test_chain_csv_dump(self, tmp_path):
        chain = rj_mcmc(gaussian_problem(GaussianExampleConfig()), 2_000, seed=3)
        path = tmp_path / "chain.csv"
        chain.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,k,m1,m2"
        assert len(lines) == 2_001
