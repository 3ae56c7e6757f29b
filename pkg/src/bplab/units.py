"""Rational-exponent signatures over named base physical units.

A signature is a product of base units raised to rational exponents, e.g.
``second^1 * meter^-1`` for slowness.  Signatures multiply by adding
exponents; zero exponents are dropped, so the empty signature is the
dimensionless identity and equality is structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

ExponentLike = Union[int, Fraction, str]


def _canon(items) -> tuple[tuple[str, Fraction], ...]:
    merged: dict[str, Fraction] = {}
    for name, exp in items:
        merged[name] = merged.get(name, Fraction(0)) + Fraction(exp)
    return tuple(sorted((n, e) for n, e in merged.items() if e != 0))


@dataclass(frozen=True)
class UnitSignature:
    """Immutable map from base-unit name to rational exponent."""

    exponents: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def of(cls, **exponents: ExponentLike) -> "UnitSignature":
        return cls(_canon(exponents.items()))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, ExponentLike]) -> "UnitSignature":
        return cls(_canon(mapping.items()))

    @property
    def is_dimensionless(self) -> bool:
        return not self.exponents

    def __mul__(self, other: "UnitSignature") -> "UnitSignature":
        return UnitSignature(_canon(self.exponents + other.exponents))

    def __truediv__(self, other: "UnitSignature") -> "UnitSignature":
        return self * other**-1

    def __pow__(self, n: ExponentLike) -> "UnitSignature":
        n = Fraction(n)
        return UnitSignature(_canon((name, exp * n) for name, exp in self.exponents))

    def __str__(self) -> str:
        if not self.exponents:
            return "dimensionless"
        parts = []
        for name, exp in self.exponents:
            parts.append(name if exp == 1 else f"{name}^{exp}")
        return "*".join(parts)

    def to_json(self) -> dict[str, str]:
        return {name: str(exp) for name, exp in self.exponents}


DIMENSIONLESS = UnitSignature()
SECOND = UnitSignature.of(second=1)
METER = UnitSignature.of(meter=1)
SLOWNESS = SECOND / METER
VELOCITY = METER / SECOND

#: Aliases accepted in JSON configs.
NAMED_UNITS: dict[str, UnitSignature] = {
    "dimensionless": DIMENSIONLESS,
    "second": SECOND,
    "meter": METER,
    "slowness": SLOWNESS,
    "velocity": VELOCITY,
}


def parse_unit(spec) -> UnitSignature:
    """Build a signature from a JSON value: an alias string or an exponent map."""
    if isinstance(spec, UnitSignature):
        return spec
    if isinstance(spec, str):
        try:
            return NAMED_UNITS[spec]
        except KeyError:
            raise ValueError(f"unknown unit alias {spec!r}") from None
    if isinstance(spec, Mapping):
        return UnitSignature.from_mapping(spec)
    raise ValueError(f"cannot parse unit from {spec!r}")


def product(signatures) -> UnitSignature:
    out = DIMENSIONLESS
    for sig in signatures:
        out = out * sig
    return out
