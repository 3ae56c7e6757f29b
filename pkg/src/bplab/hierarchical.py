"""Scalar hierarchical toy problem with discrete hyperparameters.

The observable d and the unknown m are scalars tied by d = k*m.  Their priors
are zero-mean Gaussians whose standard deviations lam (data) and delta
(model) are themselves unknown, carrying a discrete two-atom hyperprior.  The
posterior over (lam, delta) then has closed-form cells, and the whole point
of the exercise is that those "prior" hyperparameters come out depending on
the forward constant k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .densities import Density
from .forward import ForwardModel
from .oracle import quad_integrate

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class HierConfig:
    """Hyperprior weights, forward constant, and hyperparameter atoms.

    With the default two atoms per hyperparameter, ``pi_lambda`` is the
    probability of the first lam atom (likewise ``pi_delta``).  Larger atom
    sets need explicit weight tuples.  ``lam`` scales the data prior std,
    ``delta`` the model prior std; the toy is dimensionless.
    """

    pi_lambda: float = 0.5
    pi_delta: float = 0.5
    k: float = 1.0
    lambda_atoms: tuple[float, ...] = (1.0, 2.0)
    delta_atoms: tuple[float, ...] = (1.0, 2.0)
    lambda_weights: Optional[tuple[float, ...]] = None
    delta_weights: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        for pi in (self.pi_lambda, self.pi_delta):
            if not 0.0 <= pi <= 1.0:
                raise ValueError(f"hyperprior probability {pi} outside [0, 1]")
        for atoms in (self.lambda_atoms, self.delta_atoms):
            if any(a <= 0 for a in atoms):
                raise ValueError("atom values must be positive")
        if not math.isfinite(self.k):
            raise ValueError("forward constant k must be finite")

    def weights_lambda(self) -> tuple[float, ...]:
        if self.lambda_weights is not None:
            return self.lambda_weights
        if len(self.lambda_atoms) != 2:
            raise ValueError("explicit lambda_weights required for non-pair atoms")
        return (self.pi_lambda, 1.0 - self.pi_lambda)

    def weights_delta(self) -> tuple[float, ...]:
        if self.delta_weights is not None:
            return self.delta_weights
        if len(self.delta_atoms) != 2:
            raise ValueError("explicit delta_weights required for non-pair atoms")
        return (self.pi_delta, 1.0 - self.pi_delta)

    def to_json(self) -> dict:
        return {
            "pi_lambda": self.pi_lambda, "pi_delta": self.pi_delta, "k": self.k,
            "lambda_atoms": list(self.lambda_atoms),
            "delta_atoms": list(self.delta_atoms),
        }


def _weight(atoms, weights, value) -> float:
    for a, w in zip(atoms, weights):
        if a == value:
            return w
    return 0.0


def _gauss(x: float, std: float) -> float:
    return math.exp(-0.5 * (x / std) ** 2) / (std * SQRT_2PI)


def joint_prior(cfg: HierConfig, d: float, m: float, lam: float, delta: float) -> float:
    """Joint prior weight of (d, m, lam, delta); zero off the atom grid."""
    w = _weight(cfg.lambda_atoms, cfg.weights_lambda(), lam) * \
        _weight(cfg.delta_atoms, cfg.weights_delta(), delta)
    if w == 0.0:
        return 0.0
    return w * _gauss(d, lam) * _gauss(m, delta)


def posterior_unnormalized(cfg: HierConfig, m: float, lam: float, delta: float) -> float:
    """Joint prior restricted to the forward graph d = k*m."""
    return joint_prior(cfg, cfg.k * m, m, lam, delta)


@dataclass(frozen=True)
class ThetaPosterior:
    """Normalized posterior table over the (lam, delta) atom grid."""

    lambda_atoms: tuple[float, ...]
    delta_atoms: tuple[float, ...]
    probs: np.ndarray            # shape (len(lambda_atoms), len(delta_atoms))
    normalization: float         # sum of the unnormalized cells

    def __post_init__(self):
        if np.any(self.probs < 0):
            raise ValueError("negative posterior cell")
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError("posterior table does not sum to 1")

    def cell(self, lam: float, delta: float) -> float:
        i = self.lambda_atoms.index(lam)
        j = self.delta_atoms.index(delta)
        return float(self.probs[i, j])

    def to_json(self) -> dict:
        return {
            "lambda_atoms": list(self.lambda_atoms),
            "delta_atoms": list(self.delta_atoms),
            "probs": self.probs.tolist(),
            "normalization": self.normalization,
        }


def _cell_closed_form(cfg: HierConfig, i: int, j: int) -> float:
    """The integrated-over-m weight of one (lam, delta) cell.

    For the canonical atoms {1, 2} these are the exact four expressions of
    the worked toy; other atom sets fall back to quadrature of the
    unnormalized posterior.
    """
    k = cfg.k
    wl = cfg.weights_lambda()[i]
    wd = cfg.weights_delta()[j]
    if wl == 0.0 or wd == 0.0:
        return 0.0
    if cfg.lambda_atoms == (1.0, 2.0) and cfg.delta_atoms == (1.0, 2.0):
        table = {
            (0, 0): (1 / (2 * math.pi)) * math.sqrt(2 * math.pi / (k * k + 1)),
            (1, 0): (1 / (4 * math.pi)) * math.sqrt(8 * math.pi / (k * k + 4)),
            (0, 1): (1 / (4 * math.pi)) * math.sqrt(8 * math.pi / (4 * k * k + 1)),
            (1, 1): (1 / (8 * math.pi)) * math.sqrt(8 * math.pi / (k * k + 1)),
        }
        return wl * wd * table[(i, j)]
    lam = cfg.lambda_atoms[i]
    delta = cfg.delta_atoms[j]
    res = quad_integrate(
        lambda x: posterior_unnormalized(cfg, x[0], lam, delta),
        [(-math.inf, math.inf)], rel_tol=1e-12,
    )
    return res.value


def theta_posterior(cfg: HierConfig) -> ThetaPosterior:
    """Marginal posterior over the hyperparameter grid, jointly normalized.

    The underlying expressions omit one shared constant (the marginal
    probability of the observation), so the table is normalized to sum to 1;
    cell ratios are unaffected.
    """
    nl, nd = len(cfg.lambda_atoms), len(cfg.delta_atoms)
    cells = np.array([[_cell_closed_form(cfg, i, j) for j in range(nd)]
                      for i in range(nl)])
    total = float(cells.sum())
    if total <= 0.0:
        raise ValueError("all posterior cells are zero: degenerate hyperpriors")
    return ThetaPosterior(
        lambda_atoms=cfg.lambda_atoms,
        delta_atoms=cfg.delta_atoms,
        probs=cells / total,
        normalization=total,
    )


def lambda_marginal(cfg: HierConfig) -> np.ndarray:
    """Posterior probabilities of the lam atoms (rows of the table)."""
    return theta_posterior(cfg).probs.sum(axis=1)


def delta_marginal(cfg: HierConfig) -> np.ndarray:
    """Posterior probabilities of the delta atoms (columns of the table)."""
    return theta_posterior(cfg).probs.sum(axis=0)


@dataclass(frozen=True)
class AcausalityCurve:
    """Hyperparameter marginals tabulated against the forward constant k."""

    k_grid: tuple[float, ...]
    p_lambda_first: tuple[float, ...]
    p_delta_first: tuple[float, ...]
    variation_lambda: float
    variation_delta: float
    acausal_lambda: bool
    acausal_delta: bool

    @property
    def acausal(self) -> bool:
        return self.acausal_lambda or self.acausal_delta

    def to_json(self) -> dict:
        return {
            "k_grid": list(self.k_grid),
            "p_lambda_first": list(self.p_lambda_first),
            "p_delta_first": list(self.p_delta_first),
            "variation_lambda": self.variation_lambda,
            "variation_delta": self.variation_delta,
            "acausal_lambda": self.acausal_lambda,
            "acausal_delta": self.acausal_delta,
            "acausal": self.acausal,
        }


def acausality_probe(cfg: HierConfig, k_grid: Sequence[float]) -> AcausalityCurve:
    """Tabulate the hyperparameter marginals against k.

    Genuinely prior quantities could not vary with the forward relation;
    any variation beyond numerical noise is therefore flagged as acausal.
    """
    k_grid = tuple(float(k) for k in k_grid)
    if not k_grid:
        raise ValueError("k_grid must be nonempty")
    import dataclasses
    p_l, p_d = [], []
    for k in k_grid:
        c = dataclasses.replace(cfg, k=k)
        p_l.append(float(lambda_marginal(c)[0]))
        p_d.append(float(delta_marginal(c)[0]))
    var_l = max(p_l) - min(p_l)
    var_d = max(p_d) - min(p_d)
    return AcausalityCurve(
        k_grid=k_grid,
        p_lambda_first=tuple(p_l),
        p_delta_first=tuple(p_d),
        variation_lambda=var_l,
        variation_delta=var_d,
        acausal_lambda=var_l > 1e-6,
        acausal_delta=var_d > 1e-6,
    )


@dataclass(frozen=True)
class MisfitResult:
    lambda_star: float
    evidence: float
    n_evals: int

    def to_json(self) -> dict:
        return {"lambda_star": self.lambda_star, "evidence": self.evidence,
                "n_evals": self.n_evals}


def misfit_lambda_estimator(d_obs: float, f: ForwardModel, m_prior: Density,
                            lambda_range: tuple[float, float],
                            tol: float = 1e-6) -> MisfitResult:
    """Data std that maximizes the integrated posterior mass over model space.

    Golden-section search over lam of

        E(lam) = integral N(f(m); d_obs, lam^2) p_m(m) dm.

    What this picks out is a measure of how badly the forward map fits the
    observation (it grows with the misfit), not a property of the noise.
    """
    if f.m_dim != 1 or f.d_dim != 1:
        raise ValueError("estimator expects a scalar forward model")
    lo, hi = lambda_range
    if not 0.0 < lo < hi:
        raise ValueError("lambda_range must be a positive interval")

    evals = [0]

    def evidence(lam: float) -> float:
        evals[0] += 1
        res = quad_integrate(
            lambda m: _gauss(f.apply(m)[0] - d_obs, lam) * m_prior(m),
            m_prior.support, rel_tol=1e-10,
        )
        return res.value

    probes = [evidence(x) for x in np.linspace(lo, hi, 9)]
    if max(probes) <= 0.0:
        raise ValueError("integrated posterior vanishes across the lambda range")

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = evidence(c1), evidence(c2)
    while b - a > tol:
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = evidence(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = evidence(c1)
    lam = 0.5 * (a + b)
    return MisfitResult(lambda_star=lam, evidence=evidence(lam), n_evals=evals[0])
