"""Conditioning a 2-D density onto a 1-D curve, two ways, and the report
showing that the two ways contradict each other.

The *naive* conditional simply restricts the 2-D evaluator to the curve and
renormalizes over the curve parameter.  That is the textbook rule this module
deliberately reproduces without any metric correction, because the point of
the exercise is to exhibit its chart dependence: the same rule applied in a
reparameterized chart and mapped back gives a different answer.  The slab
machinery makes the effect precise by realizing each naive conditional as the
shrinking-slab limit of a chart-dependent family of 2-D conditionals.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .densities import (Density, Diffeomorphism, grid_density_1d, pushforward,
                        reciprocal_map, uniform_box)
from .forward import graph_restrict, two_ray_velocity
from .oracle import quad_integrate
from .units import SECOND, SLOWNESS


class NoStableLimitError(RuntimeError):
    """The slab family's conditionals do not settle as the width shrinks."""


@dataclass(frozen=True)
class Curve:
    """1-D curve embedded in a 2-D chart, parameterized over t_range."""

    t_range: tuple[float, float]
    embed: Callable[[float], tuple[float, float]]
    chart: str

    def __post_init__(self):
        lo, hi = self.t_range
        if not lo < hi:
            raise ValueError("empty parameter range")
        ts = np.linspace(lo, hi, 17)
        pts = [self.embed(t) for t in ts]
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if math.dist(a, b) == 0.0:
                    raise ValueError("embedding not injective at sampled points")


def diagonal_curve(chart: str, lo: float, hi: float) -> Curve:
    """The curve x2 = x1 parameterized by the first coordinate."""
    return Curve(t_range=(lo, hi), embed=lambda t: (t, t), chart=chart)


@dataclass(frozen=True)
class SlabFamily:
    """A transverse-distance function vanishing exactly on a curve.

    ``delta`` measures distance in the geometry of ``chart`` but is expressed
    as a function of points in the evaluation chart.  The slab of width eps
    is the region {delta < eps}.
    """

    delta: Callable[[tuple[float, float]], float]
    chart: str


def affine_slab(scale: float = 1.0) -> SlabFamily:
    """delta = scale * |x2 - x1|: slabs of constant width around the diagonal."""
    return SlabFamily(delta=lambda p: scale * abs(p[1] - p[0]), chart="affine")


def reciprocal_chart_slab() -> SlabFamily:
    """delta = |1/x2 - 1/x1|: constant-width slabs in the reciprocal chart,
    evaluated in the current chart's coordinates."""
    return SlabFamily(delta=lambda p: abs(1.0 / p[1] - 1.0 / p[0]), chart="reciprocal")


def _normalized_grid(fn, lo: float, hi: float, n: int, rel_tol: float = 1e-10):
    """Evaluate fn on a grid over [lo, hi] and normalize by quadrature."""
    res = quad_integrate(lambda x: fn(x[0]), [(lo, hi)], rel_tol=rel_tol)
    if res.value <= 0.0:
        raise ValueError("restriction has zero mass")
    ts = np.linspace(lo, hi, n)
    vals = np.array([fn(t) for t in ts]) / res.value
    return ts, vals, res.value


def support_interval(fn, lo: float, hi: float, n_scan: int = 4001) -> tuple[float, float]:
    """Locate the interval where a 1-D evaluator is positive.

    The evaluators here are positive on a single interval; endpoints are
    refined by bisection to ~1e-12 of the scan step.
    """
    ts = np.linspace(lo, hi, n_scan)
    vals = np.array([fn(t) for t in ts])
    pos = np.nonzero(vals > 0.0)[0]
    if len(pos) == 0:
        raise ValueError("evaluator vanishes on the whole range")
    i0, i1 = pos[0], pos[-1]

    def refine(outside: float, inside: float) -> float:
        # bisect the edge between a zero point and a positive point
        for _ in range(60):
            mid = 0.5 * (outside + inside)
            if fn(mid) > 0.0:
                inside = mid
            else:
                outside = mid
        return inside

    left = ts[i0] if i0 == 0 else refine(ts[i0 - 1], ts[i0])
    right = ts[i1] if i1 == n_scan - 1 else refine(ts[i1 + 1], ts[i1])
    return float(left), float(right)


def interior_grid(lo: float, hi: float, n: int = 81, shrink: float = 0.8) -> np.ndarray:
    """Evenly spaced points over the middle ``shrink`` fraction of [lo, hi]."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * shrink
    return np.linspace(mid - half, mid + half, n)


def naive_conditional(p: Density, c: Curve, n_grid: int = 257) -> Density:
    """Restrict ``p`` to the curve and renormalize over the curve parameter.

    No arclength or metric factor is applied: this is the straightforward
    rule whose chart dependence the contradiction report exhibits.
    """
    if p.dim != 2:
        raise ValueError("naive_conditional expects a 2-D density")

    def restricted(t: float) -> float:
        return p(c.embed(t))

    lo, hi = c.t_range
    try:
        a, b = support_interval(restricted, lo, hi)
    except ValueError:
        raise ValueError("curve misses the support of the density") from None
    res = quad_integrate(lambda x: restricted(x[0]), [(a, b)], rel_tol=1e-10)
    if res.value <= 0.0:
        raise ValueError("curve misses the support of the density")
    z = res.value
    return Density(
        dim=1,
        support=((a, b),),
        fn=lambda x: restricted(x[0]) / z,
        coord_units=(p.coord_units[0],),
        kind=f"naive-conditional[{c.chart}]",
        normalized=True,
    )


def transform_1d(p: Density, h: Diffeomorphism) -> Density:
    """1-D specialization of the covariant pushforward."""
    if p.dim != 1 or h.dim != 1:
        raise ValueError("transform_1d expects 1-D density and map")
    return pushforward(p, h)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(21)


def _gauss_segment(fn, a: float, b: float) -> float:
    """21-point Gauss-Legendre rule; exact to machine precision for the
    analytic integrands met across the (tiny) transverse windows."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * sum(w * fn(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _transverse_window(fam: SlabFamily, t: float, y0: float, eps: float,
                       span: float) -> tuple[float, float]:
    """Find {y : delta((t, y)) < eps} around y0 by bracketing + root-finding.

    Assumes delta is continuous, vanishes at y0 and grows monotonically on
    each side of the curve (true for all families used here).
    """

    def d(y: float) -> float:
        return fam.delta((t, y)) - eps

    def edge(direction: float) -> float:
        step = span
        prev = y0
        for _ in range(200):
            y = y0 + direction * step
            if d(y) >= 0.0:
                return optimize.brentq(d, prev, y, rtol=8.9e-16)
            prev = y
            step *= 2.0
        raise ValueError("slab edge not found: eps too large for the chart domain")

    return edge(-1.0), edge(+1.0)


def slab_conditional(p: Density, fam: SlabFamily, eps: float, c: Curve,
                     n_grid: int = 81) -> Density:
    """Conditional obtained by integrating ``p`` across the slab {delta < eps}.

    At each curve parameter t the density is integrated along the transverse
    section {(t, y)} of the slab, then the profile is renormalized over t.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if p.dim != 2:
        raise ValueError("slab_conditional expects a 2-D density")

    span0 = eps * max(1.0, abs(c.t_range[0]) + abs(c.t_range[1]))
    y_bounds = p.support[1]
    cache: dict[float, float] = {}

    def window(t: float) -> tuple[float, float]:
        y0 = c.embed(t)[1]
        y_lo, y_hi = _transverse_window(fam, t, y0, eps, span0)
        return max(y_lo, y_bounds[0]), min(y_hi, y_bounds[1])

    def profile(t: float) -> float:
        got = cache.get(t)
        if got is not None:
            return got
        y_lo, y_hi = window(t)
        val = _gauss_segment(lambda y: p((t, y)), y_lo, y_hi) if y_lo < y_hi else 0.0
        cache[t] = val
        return val

    lo, hi = c.t_range
    try:
        a, b = support_interval(profile, lo, hi, n_scan=1001)
    except ValueError:
        raise ValueError("slab carries zero mass") from None
    # The profile has O(eps)-wide clipped strips just inside its support
    # edges; hand them to the quadrature as breakpoints so the normalization
    # resolves them at every eps.
    strip_a = a + 2.0 * max(eps, window(a)[1] - window(a)[0])
    strip_b = b - 2.0 * max(eps, window(b)[1] - window(b)[0])
    mid = 0.5 * (a + b)
    pts = sorted({min(strip_a, mid), max(strip_b, mid)})
    res = quad_integrate(lambda x: profile(x[0]), [(a, b)], rel_tol=1e-9, points=pts)
    if res.value <= 0.0:
        raise ValueError("slab carries zero mass")
    z = res.value
    return Density(
        dim=1,
        support=((a, b),),
        fn=lambda x: profile(x[0]) / z,
        coord_units=(p.coord_units[0],),
        kind=f"slab-conditional[{fam.chart}]",
        normalized=True,
    )


@dataclass(frozen=True)
class SlabLimitReport:
    ts: np.ndarray
    values: np.ndarray                 # normalized profile at the smallest eps
    eps_sequence: tuple[float, ...]
    deviations: tuple[float, ...]      # sup |profile(eps_i) - profile(eps_last)|
    converged: bool


def slab_limit(p: Density, fam: SlabFamily, c: Curve,
               eps_sequence: Sequence[float] = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4),
               ts: Optional[np.ndarray] = None,
               n_grid: int = 81) -> tuple[Density, SlabLimitReport]:
    """Extrapolate the slab conditionals along a shrinking eps sequence.

    Profiles are compared on a fixed interior grid; the per-eps sup deviation
    from the smallest-eps profile must shrink monotonically (within slack),
    otherwise no stable limit exists.  The per-eps profiles are independent
    and evaluated concurrently (bounded by BPL_THREADS).
    """
    eps_sequence = tuple(eps_sequence)
    if any(b >= a for a, b in zip(eps_sequence, eps_sequence[1:])) or eps_sequence[-1] <= 0:
        raise ValueError("eps_sequence must decrease strictly to 0")

    if ts is None:
        naive_sup = support_interval(lambda t: p(c.embed(t)), *c.t_range)
        ts = interior_grid(*naive_sup, n=n_grid)
    ts = np.asarray(ts, float)

    def grid_for(eps: float) -> np.ndarray:
        cond = slab_conditional(p, fam, eps, c)
        return np.array([cond((t,)) for t in ts])

    workers = max(1, int(os.environ.get("BPL_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grids = list(pool.map(grid_for, eps_sequence))
    else:
        grids = [grid_for(eps) for eps in eps_sequence]

    last = grids[-1]
    deviations = tuple(float(np.max(np.abs(g - last))) for g in grids[:-1])
    # allow an absolute floor: tiny deviations are quadrature noise
    converged = all(
        d_next <= d_prev * 1.5 + 1e-7
        for d_prev, d_next in zip(deviations, deviations[1:])
    )
    if not converged:
        raise NoStableLimitError(
            f"no stable limit: slab deviations {deviations} are not shrinking"
        )
    limit = grid_density_1d(ts, last, unit=p.coord_units[0], kind="slab-limit")
    report = SlabLimitReport(ts=ts, values=last, eps_sequence=eps_sequence,
                             deviations=deviations, converged=converged)
    return limit, report


def fit_log_exponent(xs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 8:
        raise ValueError("too few positive points to fit an exponent")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# The tomography contradiction report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TomographyConfig:
    """Two-ray tomography setup: velocity box, data box, ray geometry."""

    v_min: float = 1.0
    v_max: float = 5.0
    d_box: tuple[tuple[float, float], tuple[float, float]] = ((0.5, 1.6), (0.5, 1.6))
    length: float = 1.0
    ray_matrix: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 1.0), (2.0, 0.0))

    def validate(self):
        if not self.v_min < self.v_max:
            raise ValueError("empty box: v_min must be < v_max")
        if self.v_min <= 0:
            raise ValueError("velocity box must be positive for the reciprocal chart")
        for lo, hi in self.d_box:
            if not lo < hi:
                raise ValueError("empty box: data bounds must increase")

    def to_json(self) -> dict:
        return {
            "v_min": self.v_min, "v_max": self.v_max,
            "d_box": [list(iv) for iv in self.d_box],
            "length": self.length,
            "ray_matrix": [list(r) for r in self.ray_matrix],
        }


@dataclass(frozen=True)
class ContradictionReport:
    """Naive conditionals of the same posterior from two charts, compared."""

    v_grid: np.ndarray
    velocity_chart: np.ndarray       # naive conditional computed in velocity chart
    from_slowness_chart: np.ndarray  # naive slowness conditional mapped back
    constancy_deviation: float       # max/min - 1 of the velocity-chart values
    ratio_exponent: Optional[float]  # fitted log-log slope of the ratio
    constant_ok: bool
    exponent_ok: bool
    contradiction: bool
    status: str                      # "ok" | "support too small to fit exponent"
    parameterization: str
    config: TomographyConfig
    comparison_chart: str

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "comparison_chart": self.comparison_chart,
            "parameterization": self.parameterization,
            "status": self.status,
            "constancy_deviation": self.constancy_deviation,
            "ratio_exponent": self.ratio_exponent,
            "constant_ok": self.constant_ok,
            "exponent_ok": self.exponent_ok,
            "contradiction": self.contradiction,
            "v_grid": self.v_grid.tolist(),
            "velocity_chart": self.velocity_chart.tolist(),
            "from_slowness_chart": self.from_slowness_chart.tolist(),
        }


def velocity_posterior(cfg: TomographyConfig) -> Density:
    """Posterior over velocities: uniform prior restricted to the data box."""
    cfg.validate()
    g_v = two_ray_velocity(cfg.length, cfg.ray_matrix)
    model_prior = uniform_box([(cfg.v_min, cfg.v_max)] * 2,
                              units=(SLOWNESS**-1, SLOWNESS**-1))
    data_prior = uniform_box(cfg.d_box, units=(SECOND, SECOND))
    return graph_restrict(data_prior, model_prior, g_v)


def borel_contradiction_report(cfg: TomographyConfig, n_grid: int = 81,
                               comparison_chart: str = "slowness") -> ContradictionReport:
    """Condition the tomography posterior on the equal-speeds curve in two
    charts and compare the results in velocity coordinates.

    With ``comparison_chart="velocity"`` the second conditional is computed
    in the velocity chart as well (a self-comparison control: no
    contradiction can appear).
    """
    if comparison_chart not in ("slowness", "velocity"):
        raise ValueError("comparison_chart must be 'slowness' or 'velocity'")
    p_v = velocity_posterior(cfg)
    curve_v = diagonal_curve("velocity", cfg.v_min, cfg.v_max)
    cond_v = naive_conditional(p_v, curve_v)

    if comparison_chart == "velocity":
        cond_back = cond_v
    else:
        recip = reciprocal_map(2)
        p_s = pushforward(p_v, recip)
        s_lo, s_hi = 1.0 / cfg.v_max, 1.0 / cfg.v_min
        curve_s = diagonal_curve("slowness", s_lo, s_hi)
        cond_s = naive_conditional(p_s, curve_s)
        cond_back = transform_1d(cond_s, reciprocal_map(1))

    a, b = cond_v.support[0]
    a2, b2 = cond_back.support[0]
    lo, hi = max(a, a2), min(b, b2)
    grid = interior_grid(lo, hi, n=n_grid)
    vals_v = np.array([cond_v((t,)) for t in grid])
    vals_b = np.array([cond_back((t,)) for t in grid])

    constancy = float(vals_v.max() / vals_v.min() - 1.0)
    constant_ok = constancy <= 1e-6

    status = "ok"
    exponent = None
    exponent_ok = False
    if hi / lo < 1.02 or len(grid) < 8:
        status = "support too small to fit exponent"
        contradiction = False
    else:
        if comparison_chart == "velocity":
            exponent = fit_log_exponent(grid, vals_b / vals_v)
            exponent_ok = abs(exponent) <= 0.02
            contradiction = False
        else:
            exponent = fit_log_exponent(grid, vals_b / vals_v)
            exponent_ok = abs(exponent - 2.0) <= 0.02
            ratio = vals_b / vals_v
            contradiction = bool(ratio.max() / ratio.min() - 1.0 > 1e-3)

    return ContradictionReport(
        v_grid=grid,
        velocity_chart=vals_v,
        from_slowness_chart=vals_b,
        constancy_deviation=constancy,
        ratio_exponent=exponent,
        constant_ok=constant_ok,
        exponent_ok=exponent_ok,
        contradiction=contradiction,
        status=status,
        parameterization="curves parameterized by the first coordinate (v1, resp. s1)",
        config=cfg,
        comparison_chart=comparison_chart,
    )
