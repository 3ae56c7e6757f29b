"""Forward relations d = g(m) and the restriction of joint priors to the
forward graph (the unnormalized posterior evaluator over model space)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .densities import Density, Point
from .units import DIMENSIONLESS, METER, SECOND, SLOWNESS, UnitSignature

DEFAULT_RAY_MATRIX = ((1.0, 1.0), (2.0, 0.0))


@dataclass(frozen=True)
class ForwardModel:
    """Deterministic map from model space (dim m_dim) to data space (dim d_dim)."""

    m_dim: int
    d_dim: int
    fn: Callable[[Point], tuple]
    name: str
    m_units: tuple[UnitSignature, ...] = ()
    d_units: tuple[UnitSignature, ...] = ()

    def __post_init__(self):
        if not self.m_units:
            object.__setattr__(self, "m_units", (DIMENSIONLESS,) * self.m_dim)
        if not self.d_units:
            object.__setattr__(self, "d_units", (DIMENSIONLESS,) * self.d_dim)

    def apply(self, m: Point) -> tuple:
        if len(m) != self.m_dim:
            raise ValueError(f"model point has dimension {len(m)}, expected {self.m_dim}")
        d = self.fn(m)
        if len(d) != self.d_dim:
            raise ValueError(f"forward map returned dimension {len(d)}, expected {self.d_dim}")
        return d


def apply(f: ForwardModel, m: Point) -> tuple:
    return f.apply(m)


def _check_linear_units(name, matrix_unit, m_units, d_units):
    """For the built-in linear maps d_i = sum_j A_ij m_j the declared data
    units must equal matrix unit times model unit."""
    for i, du in enumerate(d_units):
        for mu in m_units:
            if matrix_unit * mu != du:
                raise ValueError(
                    f"{name}: declared data unit {du} of component {i} does not "
                    f"match {matrix_unit} * {mu} computed through the map"
                )


def two_ray_slowness(length: float = 1.0, ray_matrix=DEFAULT_RAY_MATRIX) -> ForwardModel:
    """Two-ray, two-block travel times t_i = sum_j L_ij s_j, slowness unknowns.

    ``ray_matrix`` holds the dimensionless path-length fractions; the physical
    lengths are ``length * ray_matrix``.
    """
    A = np.asarray(ray_matrix, float) * length
    if A.shape != (2, 2) or abs(np.linalg.det(A)) < 1e-14:
        raise ValueError("ray matrix must be 2x2 and invertible")
    m_units = (SLOWNESS, SLOWNESS)
    d_units = (SECOND, SECOND)
    _check_linear_units("two_ray_slowness", METER, m_units, d_units)
    return ForwardModel(
        m_dim=2, d_dim=2,
        fn=lambda s: (A[0, 0] * s[0] + A[0, 1] * s[1], A[1, 0] * s[0] + A[1, 1] * s[1]),
        name="two-ray-slowness",
        m_units=m_units, d_units=d_units,
    )


def two_ray_velocity(length: float = 1.0, ray_matrix=DEFAULT_RAY_MATRIX,
                     eps: float = 1e-9) -> ForwardModel:
    """Same rays with velocity unknowns: g_v(v) = g_s(1/v_1, 1/v_2)."""
    g_s = two_ray_slowness(length, ray_matrix)

    def fn(v: Point) -> tuple:
        if abs(v[0]) < eps or abs(v[1]) < eps:
            raise ValueError("velocity too close to 0 for the reciprocal")
        return g_s.fn((1.0 / v[0], 1.0 / v[1]))

    return ForwardModel(
        m_dim=2, d_dim=2, fn=fn, name="two-ray-velocity",
        m_units=(SLOWNESS**-1, SLOWNESS**-1), d_units=(SECOND, SECOND),
    )


def one_block(length: float = 1.0) -> ForwardModel:
    """Single homogeneous block crossed twice by both rays: d = (2Ls, 2Ls)."""
    m_units = (SLOWNESS,)
    d_units = (SECOND, SECOND)
    _check_linear_units("one_block", METER, m_units, d_units)
    return ForwardModel(
        m_dim=1, d_dim=2,
        fn=lambda s: (2.0 * length * s[0], 2.0 * length * s[0]),
        name="one-block",
        m_units=m_units, d_units=d_units,
    )


def two_block(length: float = 1.0) -> ForwardModel:
    """Two blocks with individual slownesses: d = (L(s1+s2), 2Ls1)."""
    m_units = (SLOWNESS, SLOWNESS)
    d_units = (SECOND, SECOND)
    _check_linear_units("two_block", METER, m_units, d_units)
    return ForwardModel(
        m_dim=2, d_dim=2,
        fn=lambda s: (length * (s[0] + s[1]), 2.0 * length * s[0]),
        name="two-block",
        m_units=m_units, d_units=d_units,
    )


def linear(k: float) -> ForwardModel:
    """Scalar linear relation d = k*m (dimensionless toy)."""
    return ForwardModel(
        m_dim=1, d_dim=1,
        fn=lambda m: (k * m[0],),
        name="linear",
    )


def graph_restrict(data_prior: Density, model_prior: Density,
                   f: ForwardModel) -> Density:
    """Unnormalized posterior evaluator m -> data_prior(f(m)) * model_prior(m).

    The support box stays the model prior's box; the data-prior factor acts
    as an indicator/weight inside the evaluator.
    """
    if data_prior.dim != f.d_dim:
        raise ValueError(f"data prior dim {data_prior.dim} != forward d_dim {f.d_dim}")
    if model_prior.dim != f.m_dim:
        raise ValueError(f"model prior dim {model_prior.dim} != forward m_dim {f.m_dim}")

    def fn(m: Point) -> float:
        pm = model_prior(m)
        if pm == 0.0:
            return 0.0
        return pm * data_prior(f.apply(m))

    return Density(
        dim=f.m_dim,
        support=model_prior.support,
        fn=fn,
        coord_units=model_prior.coord_units,
        kind="graph-restricted",
        improper=model_prior.improper,
        scale_unit=model_prior.scale_unit * data_prior.unit,
    )
