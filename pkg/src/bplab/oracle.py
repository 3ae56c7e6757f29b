"""Independent brute-force verification primitives.

Adaptive quadrature, Monte Carlo integration, a random-walk Metropolis
sampler, and a minimal reversible-jump sampler.  These exist to cross-check
the analytic results computed elsewhere, so they deliberately share no code
with the formulas they verify.

All randomness flows from one explicit seed through numpy's counter-based
Philox generator; nothing touches global RNG state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float
    method: str
    n_evals: int
    converged: bool = True

    def __post_init__(self):
        if self.error < 0 or self.n_evals <= 0:
            raise ValueError("error must be >= 0 and n_evals > 0")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _scan_positive_1d(g, lo: float, hi: float, n: int = 257):
    """Edges of {t : g(t) > 0} from a grid scan, refined by bisection;
    assumes the positive set is a single interval (convex slice).  Returns
    None when no positive value is seen.  The refined edges make exact
    breakpoints, so downstream quadrature never strides a support jump."""
    ts = np.linspace(lo, hi, n)
    pos = [i for i, t in enumerate(ts) if g(t) > 0.0]
    if not pos:
        return None

    def refine(outside: float, inside: float) -> float:
        for _ in range(45):
            mid = 0.5 * (outside + inside)
            if g(mid) > 0.0:
                inside = mid
            else:
                outside = mid
        return outside  # just past the edge, so the positive part is enclosed

    i0, i1 = pos[0], pos[-1]
    left = lo if i0 == 0 else refine(ts[i0 - 1], ts[i0])
    right = hi if i1 == n - 1 else refine(ts[i1 + 1], ts[i1])
    return left, right


def _quad_1d(g, lo: float, hi: float, rel_tol: float, limit: int,
             points=None, scan: bool = False):
    """One adaptive 1-D integration; returns (value, error_bound).

    With ``scan`` the line is probed for its positive part first and the
    located edges are handed to the integrator as breakpoints, so narrow
    supports are refined rather than skipped.
    """
    if scan and points is None and math.isfinite(lo) and math.isfinite(hi):
        found = _scan_positive_1d(g, lo, hi)
        if found is not None:
            points = found
    pts = None
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        pts = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(g, lo, hi, limit=limit, epsrel=rel_tol,
                              epsabs=1e-300, points=pts)


def quad_integrate(f, box, rel_tol: float = 1e-8, points=None,
                   limit: int = 200, scan_support: bool = True) -> IntegralResult:
    """Adaptive quadrature of ``f`` over an axis-aligned box (1-3 dims).

    Multi-dimensional boxes are integrated as nested 1-D adaptive
    integrations; on finite axes each innermost line is first scanned for its
    positive part so that supports much narrower than the box cannot slip
    between quadrature nodes (positive parts are assumed to be single
    intervals per line, which holds for the convex supports used here).
    Half-infinite and infinite sides are handled by the underlying routine's
    change of variable.  ``points`` may list known breakpoints of the first
    coordinate.  If the error bound does not meet ``rel_tol``, the result is
    flagged ``converged=False``.
    """
    box = tuple(box)
    calls = [0]

    def counted(x) -> float:
        calls[0] += 1
        return f(x)

    def nested(prefix_box, tail: tuple):
        if len(prefix_box) == 1:
            # innermost level: integrates the first coordinate
            (lo, hi) = prefix_box[0]
            return _quad_1d(lambda t: counted((t,) + tail), lo, hi, rel_tol,
                            limit, points=points, scan=scan_support)
        (lo, hi) = prefix_box[-1]
        inner_errs = [0.0]

        def outer_integrand(t: float) -> float:
            val, err = nested(prefix_box[:-1], (t,) + tail)
            inner_errs[0] = max(inner_errs[0], err)
            return val

        val, err = _quad_1d(outer_integrand, lo, hi, rel_tol, limit,
                            scan=scan_support)
        span = (hi - lo) if math.isfinite(hi - lo) else 1.0
        return val, err + abs(span) * inner_errs[0]

    value, err = nested(box, ())
    converged = err <= max(10 * rel_tol * abs(value), 1e-13)
    return IntegralResult(value, err, method="adaptive-quadrature",
                          n_evals=max(calls[0], 1), converged=converged)


def mc_integrate(f, box, n: int, seed: int, vectorized: bool = False) -> IntegralResult:
    """Plain Monte Carlo estimate of the integral of ``f`` over a finite box.

    Unbiased, with the usual standard error; bit-reproducible given the seed.
    """
    if n < 1000:
        raise ValueError("need n >= 1000 samples")
    box = tuple(box)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    if not np.all(np.isfinite(lows)) or not np.all(np.isfinite(highs)):
        raise ValueError("mc_integrate needs a finite box")
    volume = float(np.prod(highs - lows))
    pts = _rng(seed).uniform(lows, highs, size=(n, len(box)))
    if vectorized:
        vals = np.asarray(f(pts), float)
    else:
        vals = np.fromiter((f(tuple(p)) for p in pts), float, n)
    if not np.any(vals):
        raise ValueError("support not hit: all sampled values are zero")
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n))
    return IntegralResult(volume * mean, volume * se, method="monte-carlo", n_evals=n)


def finite_difference_jacobian_det(fwd, x, h: float = 1e-6) -> float:
    """|det| of the central finite-difference Jacobian of a point map."""
    x = np.asarray(x, float)
    dim = len(x)
    J = np.empty((dim, dim))
    for j in range(dim):
        step = h * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        fp = np.asarray(fwd(tuple(xp)), float)
        fm = np.asarray(fwd(tuple(xm)), float)
        J[:, j] = (fp - fm) / (2 * step)
    return abs(float(np.linalg.det(J)))


# ---------------------------------------------------------------------------
# Markov chain samplers
# ---------------------------------------------------------------------------

@dataclass
class ChainSample:
    """Output of a sampler: per-step dimension tag and padded coordinates."""

    k: np.ndarray                 # (n,) int dimension label of each state
    coords: np.ndarray            # (n, kmax) float, NaN-padded
    acceptance: dict[str, float]  # per move type, in [0, 1]
    seed: int

    def states_with_k(self, k: int) -> np.ndarray:
        rows = self.coords[self.k == k]
        return rows[:, :k]

    def k_frequency(self, k: int) -> float:
        return float(np.mean(self.k == k))

    def k_frequency_se(self, k: int, n_batches: int = 100) -> float:
        """Batch-means standard error of the k-visit frequency."""
        flags = (self.k == k).astype(float)
        usable = (len(flags) // n_batches) * n_batches
        if usable < n_batches:
            raise ValueError("chain too short for batch-means error estimate")
        batches = flags[:usable].reshape(n_batches, -1).mean(axis=1)
        return float(batches.std(ddof=1) / math.sqrt(n_batches))

    def to_csv(self, path) -> None:
        """Dump the chain for diagnostics: step, k, coordinates."""
        kmax = self.coords.shape[1]
        header = "step,k," + ",".join(f"m{i + 1}" for i in range(kmax))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i, (k, row) in enumerate(zip(self.k, self.coords)):
                coords = ",".join("" if math.isnan(v) else format(v, ".17g")
                                  for v in row)
                fh.write(f"{i},{int(k)},{coords}\n")


def metropolis(target, init, steps: int, proposal_scale: float,
               seed: int) -> ChainSample:
    """Random-walk Metropolis with symmetric Gaussian proposals.

    ``target`` is an unnormalized density evaluator over points of fixed
    dimension; ``target(init)`` must be positive.
    """
    x = tuple(float(v) for v in init)
    dim = len(x)
    tx = target(x)
    if not tx > 0.0:
        raise ValueError("target is zero at the initial point")

    rng = _rng(seed)
    k_out = np.full(steps, dim, dtype=np.int8)
    coords = np.empty((steps, dim))
    accepted = 0
    chunk = 65536
    normals = uniforms = None
    pos = chunk
    for i in range(steps):
        if pos >= chunk:
            normals = rng.normal(0.0, proposal_scale, size=(chunk, dim))
            uniforms = rng.random(chunk)
            pos = 0
        prop = tuple(xi + d for xi, d in zip(x, normals[pos]))
        tp = target(prop)
        if tp > 0.0 and uniforms[pos] * tx <= tp:
            x, tx = prop, tp
            accepted += 1
        pos += 1
        coords[i] = x
    return ChainSample(
        k=k_out, coords=coords,
        acceptance={"walk": accepted / steps}, seed=seed,
    )


# --- reversible jump -------------------------------------------------------

def birth_accept_ratio(post_new: float, post_old: float, pk_new: float,
                       pk_old: float, birth_pdf: float) -> float:
    """Acceptance ratio for a dimension-raising move whose extra coordinate
    was drawn from ``birth_pdf``; the dimension-matching Jacobian is 1."""
    denom = post_old * pk_old * birth_pdf
    if denom == 0.0:
        return math.inf
    return (post_new * pk_new) / denom


def death_accept_ratio(post_new: float, post_old: float, pk_new: float,
                       pk_old: float, dropped_pdf: float) -> float:
    """Acceptance ratio for the matching dimension-lowering move."""
    denom = post_old * pk_old
    if denom == 0.0:
        return math.inf
    return (post_new * pk_new * dropped_pdf) / denom


def rj_mcmc(problem, steps: int, seed: int, scales=None,
            init=None, targets=None) -> ChainSample:
    """Minimal reversible-jump sampler over a nested {1, 2}-dimension problem.

    Birth draws the extra coordinate from the problem's shared 1-D component
    prior, so the acceptance ratio reduces to a likelihood ratio times the
    prior odds of the dimensions.  ``targets`` may override the per-k
    unnormalized posterior evaluators (excluding the dimension prior), e.g.
    to sample a posterior written down directly rather than induced by the
    problem's data prior.  Used only as a verification oracle.
    """
    ks = sorted(problem.ks())
    if ks != [1, 2]:
        raise ValueError("reversible-jump oracle supports exactly k in {1, 2}")
    component = problem.component_prior
    if component is None or component.sampler is None:
        raise ValueError("problem lacks a sampleable shared component prior")

    fwd1, prior1 = problem.forward(1), problem.model_prior(1)
    fwd2, prior2 = problem.forward(2), problem.model_prior(2)
    data_prior = problem.data_prior
    pk1, pk2 = problem.p_k.pmf(1), problem.p_k.pmf(2)

    def post1(m):
        p = prior1(m)
        return p * data_prior(fwd1.apply(m)) if p > 0.0 else 0.0

    def post2(m):
        p = prior2(m)
        return p * data_prior(fwd2.apply(m)) if p > 0.0 else 0.0

    posts = {1: post1, 2: post2}
    if targets is not None:
        posts = dict(targets)
    post1, post2 = posts[1], posts[2]
    if scales is None:
        scales = {k: problem.default_walk_scale(k) for k in (1, 2)}

    rng = _rng(seed)
    if init is None:
        init = problem.default_init()
    k, m = init
    tk = posts[k](m)
    if not tk > 0.0:
        # bootstrap from prior draws; the data may exclude the default point
        draws = problem.model_prior(1).sample(rng, 100_000)
        for row in draws:
            cand = (1, tuple(row))
            t = posts[1](cand[1])
            if t > 0.0:
                k, m, tk = 1, cand[1], t
                break
        else:
            raise ValueError("zero posterior at the initial state")

    k_out = np.empty(steps, dtype=np.int8)
    coords = np.full((steps, 2), np.nan)
    tries = {"walk": 0, "birth": 0, "death": 0}
    accepts = {"walk": 0, "birth": 0, "death": 0}

    chunk = 65536
    pos = chunk
    for i in range(steps):
        if pos >= chunk:
            u_move = rng.random(chunk)
            u_acc = rng.random(chunk)
            walk_steps = rng.standard_normal((chunk, 2))
            births = component.sample(rng, chunk)[:, 0]
            pos = 0
        if u_move[pos] < 0.5:
            tries["walk"] += 1
            s = scales[k]
            prop = tuple(mi + s * d for mi, d in zip(m, walk_steps[pos]))
            tp = posts[k](prop)
            if tp > 0.0 and u_acc[pos] * tk <= tp:
                m, tk = prop, tp
                accepts["walk"] += 1
        elif k == 1:
            tries["birth"] += 1
            extra = births[pos]
            prop = (m[0], extra)
            tp = post2(prop)
            alpha = birth_accept_ratio(tp, tk, pk2, pk1, component((extra,)))
            if u_acc[pos] <= alpha:
                k, m, tk = 2, prop, tp
                accepts["birth"] += 1
        else:
            tries["death"] += 1
            prop = (m[0],)
            tp = post1(prop)
            alpha = death_accept_ratio(tp, tk, pk1, pk2, component((m[1],)))
            if u_acc[pos] <= alpha:
                k, m, tk = 1, prop, tp
                accepts["death"] += 1
        pos += 1
        k_out[i] = k
        coords[i, :k] = m

    jump_tries = tries["birth"] + tries["death"]
    jump_accepts = accepts["birth"] + accepts["death"]
    if jump_tries >= 10_000 and jump_accepts == 0:
        warnings.warn("stuck chain: no accepted dimension jumps", RuntimeWarning)
    acceptance = {
        name: (accepts[name] / tries[name]) if tries[name] else 0.0
        for name in tries
    }
    return ChainSample(k=k_out, coords=coords, acceptance=acceptance, seed=seed)
