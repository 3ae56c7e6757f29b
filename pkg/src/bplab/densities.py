"""Evaluatable probability densities on axis-aligned boxes, and coordinate changes.

Densities are evaluators plus structured support metadata.  Supports are
axis-aligned boxes (possibly half-infinite); more general supports are
expressed as indicator factors inside the evaluator.  Everything here is
immutable and pure, so values can be shared freely between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .units import DIMENSIONLESS, UnitSignature, product

Point = Sequence[float]
Interval = tuple[float, float]
Box = tuple[Interval, ...]


class ContradictoryInformationError(ValueError):
    """Raised when combined information leaves no probability mass at all."""


class DivergentIntegralError(ValueError):
    """Raised when a required normalization integral does not converge."""


def in_box(x: Point, box: Box) -> bool:
    return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, box))


def _check_dim(x: Point, dim: int) -> None:
    if len(x) != dim:
        raise ValueError(f"point has dimension {len(x)}, expected {dim}")


@dataclass(frozen=True)
class Density:
    """A nonnegative evaluator over a box in 1-3 dimensions.

    ``fn`` is the raw evaluator; calling the density clips it to zero outside
    the support box.  ``coord_units`` carry the physical unit of each
    coordinate; a normalized density has unit equal to the product of the
    coordinate-unit reciprocals.  ``scale_unit`` records any extra unit factor
    picked up by unnormalized constructions (e.g. a data-prior factor).
    """

    dim: int
    support: Box
    fn: Callable[[Point], float]
    coord_units: tuple[UnitSignature, ...] = ()
    kind: str = "custom"
    normalized: bool = False
    improper: bool = False
    sampler: Optional[Callable] = None
    scale_unit: UnitSignature = DIMENSIONLESS

    def __post_init__(self):
        if not self.coord_units:
            object.__setattr__(self, "coord_units", (DIMENSIONLESS,) * self.dim)
        if len(self.support) != self.dim or len(self.coord_units) != self.dim:
            raise ValueError("support/coord_units length must equal dim")

    def __call__(self, x: Point) -> float:
        _check_dim(x, self.dim)
        if not in_box(x, self.support):
            return 0.0
        v = self.fn(x)
        return v if v > 0.0 else 0.0

    @property
    def unit(self) -> UnitSignature:
        return self.scale_unit * product(u**-1 for u in self.coord_units)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` points; only uniform/gaussian/discrete kinds support this."""
        if self.sampler is None:
            raise ValueError(f"density of kind {self.kind!r} has no sampler")
        return self.sampler(rng, n)


def eval_density(d: Density, x: Point) -> float:
    """Evaluate ``d`` at ``x``; zero outside the support, never negative."""
    return d(x)


def uniform_box(bounds: Sequence[Interval], units=None, indicator=None) -> Density:
    """Normalized uniform density on a finite box, optionally masked by an
    extra 0/1 ``indicator`` factor (in which case it is only proportional)."""
    box = tuple((float(lo), float(hi)) for lo, hi in bounds)
    for lo, hi in box:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"empty or infinite box side ({lo}, {hi})")
    volume = math.prod(hi - lo for lo, hi in box)
    height = 1.0 / volume

    if indicator is None:
        fn = lambda x: height
    else:
        fn = lambda x: height if indicator(x) else 0.0

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        lows = np.array([lo for lo, _ in box])
        highs = np.array([hi for _, hi in box])
        pts = rng.uniform(lows, highs, size=(n, len(box)))
        if indicator is not None:
            keep = np.fromiter((indicator(p) for p in pts), bool, n)
            pts = pts[keep]
        return pts

    return Density(
        dim=len(box),
        support=box,
        fn=fn,
        coord_units=tuple(units) if units else (),
        kind="uniform-box",
        normalized=indicator is None,
        sampler=draw,
    )


def gaussian_iid(mean: float, sigma: float, dim: int = 1, units=None) -> Density:
    """Normalized isotropic Gaussian with equal mean/std in every coordinate."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    lognorm = -0.5 * dim * math.log(2 * math.pi) - dim * math.log(sigma)
    inv2s2 = 0.5 / (sigma * sigma)

    def fn(x: Point) -> float:
        q = sum((xi - mean) ** 2 for xi in x)
        return math.exp(lognorm - q * inv2s2)

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(mean, sigma, size=(n, dim))

    return Density(
        dim=dim,
        support=((-math.inf, math.inf),) * dim,
        fn=fn,
        coord_units=tuple(units) if units else (),
        kind="gaussian-iid",
        normalized=True,
        sampler=draw,
    )


def flat_improper(dim: int, units=None) -> Density:
    """Evaluator identically 1: an unnormalizable 'know nothing' data prior.

    Allowed only behind this explicit constructor; ``normalize`` rejects it.
    """
    return Density(
        dim=dim,
        support=((-math.inf, math.inf),) * dim,
        fn=lambda x: 1.0,
        coord_units=tuple(units) if units else (),
        kind="improper-flat",
        improper=True,
    )


def product_density(*factors: Density) -> Density:
    """Independent product of lower-dimensional densities."""
    dims = [f.dim for f in factors]
    offsets = np.cumsum([0] + dims)

    def fn(x: Point) -> float:
        out = 1.0
        for f, lo, hi in zip(factors, offsets[:-1], offsets[1:]):
            out *= f(x[lo:hi])
            if out == 0.0:
                return 0.0
        return out

    sampler = None
    if all(f.sampler is not None for f in factors):
        def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
            return np.hstack([f.sample(rng, n) for f in factors])

    return Density(
        dim=sum(dims),
        support=tuple(iv for f in factors for iv in f.support),
        fn=fn,
        coord_units=tuple(u for f in factors for u in f.coord_units),
        kind="product",
        normalized=all(f.normalized for f in factors),
        improper=any(f.improper for f in factors),
        sampler=sampler,
        scale_unit=product(f.scale_unit for f in factors),
    )


def grid_density_1d(ts: np.ndarray, values: np.ndarray, unit: UnitSignature = DIMENSIONLESS,
                    kind: str = "grid") -> Density:
    """1-D density defined by linear interpolation on a grid (zero outside)."""
    ts = np.asarray(ts, float)
    values = np.asarray(values, float)
    return Density(
        dim=1,
        support=((float(ts[0]), float(ts[-1])),),
        fn=lambda x: float(np.interp(x[0], ts, values)),
        coord_units=(unit,),
        kind=kind,
    )


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution given as (value, probability) atoms."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        total = 0.0
        for value, prob in self.atoms:
            if prob < 0:
                raise ValueError(f"negative probability {prob} at atom {value}")
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total}, not 1")

    def pmf(self, value: float) -> float:
        for v, p in self.atoms:
            if v == value:
                return p
        return 0.0

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for v, _ in self.atoms)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        vals = np.array([v for v, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        return rng.choice(vals, size=n, p=probs)


# ---------------------------------------------------------------------------
# Coordinate changes
# ---------------------------------------------------------------------------

UnitMap = Callable[[UnitSignature], UnitSignature]
IntervalMap = Callable[[float, float], Interval]


@dataclass(frozen=True)
class Diffeomorphism:
    """Invertible coordinate change with an explicit Jacobian determinant.

    ``unit_maps`` transform the physical unit of each coordinate;
    ``interval_maps`` map a support interval of each coordinate to its image
    (valid because all built-in maps act coordinate-wise and monotonically on
    the supports we use them with).
    """

    dim: int
    fwd: Callable[[Point], tuple]
    inv: Callable[[Point], tuple]
    jac_abs_det: Callable[[Point], float]
    unit_maps: tuple[UnitMap, ...]
    interval_maps: tuple[IntervalMap, ...]
    name: str = "custom"

    def map_box(self, box: Box) -> Box:
        out = []
        for m, (lo, hi) in zip(self.interval_maps, box):
            a, b = m(lo, hi)
            out.append((min(a, b), max(a, b)))
        return tuple(out)


def identity_map(dim: int) -> Diffeomorphism:
    return Diffeomorphism(
        dim=dim,
        fwd=lambda x: tuple(x),
        inv=lambda y: tuple(y),
        jac_abs_det=lambda x: 1.0,
        unit_maps=(lambda u: u,) * dim,
        interval_maps=(lambda lo, hi: (lo, hi),) * dim,
        name="identity",
    )


def reciprocal_map(dim: int, eps: float = 1e-9) -> Diffeomorphism:
    """Coordinate-wise reciprocal x -> 1/x, singular at 0.

    Points within ``eps`` of a coordinate zero are rejected, since the map
    (and its Jacobian) blow up there.
    """

    def check(x: Point) -> None:
        for xi in x:
            if abs(xi) < eps:
                raise ValueError(f"reciprocal map singular near 0 (|{xi}| < {eps})")

    def fwd(x: Point) -> tuple:
        check(x)
        return tuple(1.0 / xi for xi in x)

    def jac(x: Point) -> float:
        check(x)
        out = 1.0
        for xi in x:
            out /= xi * xi
        return out

    def interval(lo: float, hi: float) -> Interval:
        if lo <= 0.0 <= hi:
            raise ValueError("reciprocal map undefined on an interval containing 0")
        a = 1.0 / hi if math.isfinite(hi) else 0.0
        b = 1.0 / lo if math.isfinite(lo) else 0.0
        return (a, b) if lo > 0 else (b, a)

    return Diffeomorphism(
        dim=dim,
        fwd=fwd,
        inv=fwd,
        jac_abs_det=jac,
        unit_maps=(lambda u: u**-1,) * dim,
        interval_maps=(interval,) * dim,
        name="reciprocal",
    )


def scale_map(factors: Sequence[float]) -> Diffeomorphism:
    """Coordinate-wise rescaling x_i -> c_i x_i with dimensionless factors."""
    cs = tuple(float(c) for c in factors)
    if any(c == 0 for c in cs):
        raise ValueError("scale factors must be nonzero")
    det = abs(math.prod(cs))
    return Diffeomorphism(
        dim=len(cs),
        fwd=lambda x: tuple(c * xi for c, xi in zip(cs, x)),
        inv=lambda y: tuple(yi / c for c, yi in zip(cs, y)),
        jac_abs_det=lambda x: det,
        unit_maps=(lambda u: u,) * len(cs),
        interval_maps=tuple(
            (lambda c: lambda lo, hi: (c * lo, c * hi))(c) for c in cs
        ),
        name="scale",
    )


def custom_map_1d(fwd, inv, deriv, name="custom-1d") -> Diffeomorphism:
    """1-D diffeomorphism from scalar callables (forward, inverse, derivative)."""
    return Diffeomorphism(
        dim=1,
        fwd=lambda x: (fwd(x[0]),),
        inv=lambda y: (inv(y[0]),),
        jac_abs_det=lambda x: abs(deriv(x[0])),
        unit_maps=(lambda u: u,),
        interval_maps=(lambda lo, hi: (fwd(lo), fwd(hi)),),
        name=name,
    )


def compose(outer: Diffeomorphism, inner: Diffeomorphism) -> Diffeomorphism:
    """The map x -> outer(inner(x))."""
    if outer.dim != inner.dim:
        raise ValueError("dimension mismatch in composition")
    return Diffeomorphism(
        dim=inner.dim,
        fwd=lambda x: outer.fwd(inner.fwd(x)),
        inv=lambda y: inner.inv(outer.inv(y)),
        jac_abs_det=lambda x: outer.jac_abs_det(inner.fwd(x)) * inner.jac_abs_det(x),
        unit_maps=tuple(
            (lambda om, im: lambda u: om(im(u)))(om, im)
            for om, im in zip(outer.unit_maps, inner.unit_maps)
        ),
        interval_maps=tuple(
            (lambda om, im: lambda lo, hi: om(*sorted(im(lo, hi))))(om, im)
            for om, im in zip(outer.interval_maps, inner.interval_maps)
        ),
        name=f"{outer.name}∘{inner.name}",
    )


def jacobian_abs_det(h: Diffeomorphism, x: Point) -> float:
    """|det dh/dx| at an interior point; positive by construction."""
    _check_dim(x, h.dim)
    det = h.jac_abs_det(x)
    if not (det > 0.0 and math.isfinite(det)):
        raise ValueError(f"Jacobian determinant {det} not positive/finite at {x}")
    return det


def _support_probes(box: Box, per_dim: int = 5):
    axes = []
    for lo, hi in box:
        lo_f = lo if math.isfinite(lo) else -1e3
        hi_f = hi if math.isfinite(hi) else 1e3
        span = hi_f - lo_f
        axes.append(np.linspace(lo_f + 0.05 * span, hi_f - 0.05 * span, per_dim))
    return [tuple(pt) for pt in np.stack(np.meshgrid(*axes), -1).reshape(-1, len(box))]


def pushforward(p: Density, h: Diffeomorphism) -> Density:
    """Transport ``p`` through ``h`` so that mass is conserved.

    The result q satisfies q(h(x)) * |det dh(x)| = p(x) pointwise, i.e. it is
    the density of h(X) when X ~ p.
    """
    if p.dim != h.dim:
        raise ValueError(f"density dim {p.dim} != map dim {h.dim}")
    for probe in _support_probes(p.support):
        if p(probe) > 0.0:
            det = h.jac_abs_det(probe)
            if not (det > 0.0 and math.isfinite(det)):
                raise ValueError(f"Jacobian not positive on support at {probe}")

    def fn(y: Point) -> float:
        x = h.inv(y)
        v = p(x)
        return v / h.jac_abs_det(x) if v > 0.0 else 0.0

    sampler = None
    if p.sampler is not None:
        def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
            pts = p.sample(rng, n)
            return np.array([h.fwd(pt) for pt in pts])

    return Density(
        dim=p.dim,
        support=h.map_box(p.support),
        fn=fn,
        coord_units=tuple(m(u) for m, u in zip(h.unit_maps, p.coord_units)),
        kind="pushforward",
        normalized=p.normalized,
        improper=p.improper,
        sampler=sampler,
        scale_unit=p.scale_unit,
    )


def normalize(p: Density, rel_tol: float = 1e-8) -> tuple[Density, float]:
    """Rescale ``p`` to unit mass; returns (density, constant = 1/integral).

    Raises ContradictoryInformationError when the mass is zero (the combined
    information excludes everything) and DivergentIntegralError when it is
    infinite or cannot be resolved.
    """
    from .oracle import quad_integrate

    if p.improper:
        raise DivergentIntegralError("improper density cannot be normalized")
    res = quad_integrate(p, p.support, rel_tol=rel_tol)
    mass = res.value
    # a negative "integral" of a nonnegative evaluator means the infinite
    # range transform blew up, i.e. the mass diverges
    if not math.isfinite(mass) or mass < 0.0 or (mass > 0 and not res.converged):
        raise DivergentIntegralError(f"normalization integral unresolved (value={mass})")
    if mass == 0.0:
        raise ContradictoryInformationError("density has zero mass: contradictory information")
    const = 1.0 / mass
    return replace(
        p,
        fn=(lambda f, c: lambda x: c * f(x))(p.fn, const),
        normalized=True,
    ), const
