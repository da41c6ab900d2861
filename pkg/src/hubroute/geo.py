"""Spherical-earth geodesy: distances, initial bearings, midpoints, sectors.

All angles are degrees at the API surface; trig converts to radians at call
sites. Distances are statute miles on a sphere of radius 3958.8 mi, which is
accurate to well under hub spacing at network scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AmbiguousMidpoint, DegenerateBearing

EARTH_RADIUS_MI = 3958.8

# Squared-norm floor below which the vector sum of two unit vectors is
# treated as antipodal (midpoint undefined).
_ANTIPODAL_EPS = 1e-12


@dataclass(frozen=True)
class GeoPoint:
    """A latitude/longitude position in degrees.

    lat must lie in [-90, +90] and lon in (-180, +180].
    """

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, +90]")
        if not -180.0 < self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside (-180, +180]")


@dataclass(frozen=True)
class SectorParams:
    """Angular half-width of the forward routing sector, in degrees."""

    half_width_deg: float = 50.0

    def __post_init__(self) -> None:
        if not 0.0 < self.half_width_deg <= 180.0:
            raise ValueError(
                f"sector half-width {self.half_width_deg} outside (0, 180]"
            )


def normalize_bearing(degrees: float) -> float:
    """Normalize an angle into [0, 360)."""
    return degrees % 360.0


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in miles."""
    la1, lo1 = math.radians(a.lat), math.radians(a.lon)
    la2, lo2 = math.radians(b.lat), math.radians(b.lon)
    dlat = la2 - la1
    dlon = lo2 - lo1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_MI * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def initial_bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Initial great-circle bearing from a toward b, degrees in [0, 360).

    Raises DegenerateBearing when the points coincide; the direction is
    undefined there and the caller decides how to treat it.
    """
    if a.lat == b.lat and a.lon == b.lon:
        raise DegenerateBearing(f"bearing undefined between coincident points {a}")
    la1, la2 = math.radians(a.lat), math.radians(b.lat)
    dlon = math.radians(b.lon - a.lon)
    x = math.sin(dlon) * math.cos(la2)
    y = math.cos(la1) * math.sin(la2) - math.sin(la1) * math.cos(la2) * math.cos(dlon)
    return normalize_bearing(math.degrees(math.atan2(x, y)))


def geographic_midpoint(a: GeoPoint, b: GeoPoint) -> GeoPoint:
    """Great-circle midpoint of two points (3D vector mean back-projected).

    Raises AmbiguousMidpoint for antipodal points, where every great circle
    through the pair yields a different midpoint.
    """
    va = _unit_vector(a)
    vb = _unit_vector(b)
    sx, sy, sz = va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]
    norm_sq = sx * sx + sy * sy + sz * sz
    if norm_sq < _ANTIPODAL_EPS:
        raise AmbiguousMidpoint(f"midpoint undefined for antipodal points {a} / {b}")
    norm = math.sqrt(norm_sq)
    mx, my, mz = sx / norm, sy / norm, sz / norm
    lat = math.degrees(math.asin(max(-1.0, min(1.0, mz))))
    lon = math.degrees(math.atan2(my, mx))
    if lon <= -180.0:
        lon += 360.0
    return GeoPoint(lat, lon)


def angular_deviation(x: float, y: float) -> float:
    """Smallest absolute circular difference of two bearings, in [0, 180]."""
    d = abs(normalize_bearing(x) - normalize_bearing(y))
    return min(d, 360.0 - d)


def within_sector(candidate: float, anchor: float, params: SectorParams) -> bool:
    """True iff candidate deviates from anchor by at most the half-width.

    The boundary is inclusive: a deviation exactly equal to the half-width
    passes.
    """
    return angular_deviation(candidate, anchor) <= params.half_width_deg


def _unit_vector(p: GeoPoint) -> tuple[float, float, float]:
    la, lo = math.radians(p.lat), math.radians(p.lon)
    return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
