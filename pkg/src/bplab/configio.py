"""Construction of densities, coordinate maps, and forward models from JSON
configuration objects.  The exact schema is documented in the CLI module."""

from __future__ import annotations

from typing import Mapping

from . import densities, forward
from .units import parse_unit


def _units_from(spec, dim: int):
    if spec is None:
        return None
    if len(spec) != dim:
        raise ValueError(f"expected {dim} unit entries, got {len(spec)}")
    return tuple(parse_unit(u) for u in spec)


def density_from_config(cfg: Mapping) -> densities.Density:
    """Build a density from {"kind": ..., parameters..., "units": [...]}.

    Kinds: "uniform-box" (bounds), "gaussian-iid" (mean, sigma, dim),
    "improper-flat" (dim), "discrete" (atoms as [value, prob] pairs returns a
    DiscreteDistribution instead).
    """
    kind = cfg.get("kind")
    if kind == "uniform-box":
        bounds = [tuple(iv) for iv in cfg["bounds"]]
        return densities.uniform_box(bounds, units=_units_from(cfg.get("units"), len(bounds)))
    if kind == "gaussian-iid":
        dim = int(cfg.get("dim", 1))
        return densities.gaussian_iid(float(cfg.get("mean", 0.0)),
                                      float(cfg["sigma"]), dim,
                                      units=_units_from(cfg.get("units"), dim))
    if kind == "improper-flat":
        dim = int(cfg["dim"])
        return densities.flat_improper(dim, units=_units_from(cfg.get("units"), dim))
    raise ValueError(f"unknown density kind {kind!r}")


def discrete_from_config(cfg: Mapping) -> densities.DiscreteDistribution:
    atoms = tuple((float(v), float(p)) for v, p in cfg["atoms"])
    return densities.DiscreteDistribution(atoms)


def diffeomorphism_from_config(cfg: Mapping) -> densities.Diffeomorphism:
    """Build a coordinate change from {"kind": ..., parameters...}.

    Kinds: "identity" (dim), "reciprocal" (dim, eps), "scale" (factors).
    """
    kind = cfg.get("kind")
    if kind == "identity":
        return densities.identity_map(int(cfg["dim"]))
    if kind == "reciprocal":
        return densities.reciprocal_map(int(cfg["dim"]),
                                        eps=float(cfg.get("eps", 1e-9)))
    if kind == "scale":
        return densities.scale_map([float(c) for c in cfg["factors"]])
    raise ValueError(f"unknown diffeomorphism kind {kind!r}")


def forward_from_config(cfg: Mapping) -> forward.ForwardModel:
    """Build a forward model from {"tag": ..., parameters...}.

    Tags: "two-ray-slowness"/"two-ray-velocity" (length, ray_matrix),
    "one-block"/"two-block" (length), "linear" (k).
    """
    tag = cfg.get("tag")
    length = float(cfg.get("length", 1.0))
    if tag == "two-ray-slowness":
        return forward.two_ray_slowness(length, cfg.get("ray_matrix", forward.DEFAULT_RAY_MATRIX))
    if tag == "two-ray-velocity":
        return forward.two_ray_velocity(length, cfg.get("ray_matrix", forward.DEFAULT_RAY_MATRIX))
    if tag == "one-block":
        return forward.one_block(length)
    if tag == "two-block":
        return forward.two_block(length)
    if tag == "linear":
        return forward.linear(float(cfg["k"]))
    raise ValueError(f"unknown forward model tag {tag!r}")
