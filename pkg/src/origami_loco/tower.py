"""Twisted-tower geometry: polygon circumradius and the twist-to-height law."""
from __future__ import annotations

import math
from dataclasses import dataclass

# radicands this close to zero (relative to b^2) are treated as a flat tower
_FLAT_RTOL = 1e-12


class DomainError(ValueError):
    """Twist angle outside the physically reachable range of a tower."""


@dataclass(frozen=True)
class TowerGeometry:
    n_sides: int = 4
    side_a: float = 15.0
    panel_b: float = 15.0
    theta_int: float = math.radians(7.0)

    def __post_init__(self):
        if int(self.n_sides) != self.n_sides or self.n_sides < 3:
            raise ValueError(f"n_sides must be an integer >= 3, got {self.n_sides}")
        if not (self.side_a > 0 and self.panel_b > 0):
            raise ValueError("side_a and panel_b must be positive")
        if not (0.0 <= self.theta_int < max_twist(self)):
            raise ValueError(
                f"theta_int={math.degrees(self.theta_int):.6g} deg outside "
                f"[0, {math.degrees(max_twist(self)):.6g}) deg"
            )


def circumradius(geom: TowerGeometry) -> float:
    """Circumradius of the regular n-gon with side ``side_a``."""
    return geom.side_a / (2.0 * math.sin(math.pi / geom.n_sides))


def _radicand(geom: TowerGeometry, theta: float) -> float:
    R = circumradius(geom)
    return geom.panel_b**2 - 2.0 * R * R * (1.0 - math.cos(theta))


def tower_height(geom: TowerGeometry, theta: float) -> float:
    """Tower height (mm) at total twist ``theta`` (rad).

    Raises DomainError if the twist would need a negative squared height.
    """
    if theta < 0.0 or theta > math.pi:
        raise DomainError(f"twist {math.degrees(theta):.9g} deg outside [0, 180] deg")
    q = _radicand(geom, theta)
    if q < 0.0:
        if q >= -_FLAT_RTOL * geom.panel_b**2:
            return 0.0
        raise DomainError(
            f"twist {math.degrees(theta):.9g} deg exceeds max twist "
            f"{math.degrees(max_twist(geom)):.9g} deg"
        )
    return math.sqrt(q)


def max_twist(geom: TowerGeometry) -> float:
    """Twist (rad) at which the tower folds flat, or pi if it never does."""
    R = circumradius(geom)
    c = 1.0 - geom.panel_b**2 / (2.0 * R * R)
    if c <= -1.0:
        return math.pi
    return math.acos(c)
