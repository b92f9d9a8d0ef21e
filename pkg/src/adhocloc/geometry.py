"""Plane geometry for server election and angular zone partitioning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    pass


def centroid(points: Sequence) -> tuple[float, float]:
    """Centre of gravity of a point set: the coordinate-wise mean."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        raise GeometryError("centroid of an empty point set")
    arr = arr.reshape(-1, 2)
    return float(arr[:, 0].mean()), float(arr[:, 1].mean())


def dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def elect_server(candidates: Iterable[int], positions, reference) -> int:
    """The candidate closest to the reference point; ties go to the lowest id.

    `positions` is indexable by node id ((n, 2) array or mapping).
    """
    best_id = -1
    best_d = math.inf
    for node in candidates:
        d = dist(positions[node], reference)
        if d < best_d or (d == best_d and node < best_id):
            best_d = d
            best_id = node
    if best_id < 0:
        raise GeometryError("cannot elect a server from an empty candidate set")
    return best_id


def ring_next(zone: int, n_zones: int) -> int:
    """Successor on the virtual ring of zone servers (single cycle)."""
    return (zone + 1) % n_zones


@dataclass(frozen=True)
class ZoneLayout:
    """Angular partition of the plane into n equal sectors about a centre point.

    Zone k spans polar angles (k*alpha, (k+1)*alpha) with alpha = 2*pi/n.
    Boundary rays belong to the lower-indexed adjacent zone, the 0/2pi ray and
    the centre itself to zone 0. n_zones == 1 is the degenerate whole-plane
    layout used by single-server setups.
    """

    n_zones: int
    center: tuple[float, float]

    def __post_init__(self):
        if self.n_zones < 1:
            raise GeometryError("need at least one zone")
        if self.n_zones >= 2 and not (0 < self.alpha <= math.pi):
            raise GeometryError("zone aperture must satisfy 0 < alpha <= pi")

    @property
    def alpha(self) -> float:
        return TWO_PI / self.n_zones

    def boundaries(self, zone: int) -> tuple[float, float]:
        if not 0 <= zone < self.n_zones:
            raise GeometryError(f"zone {zone} not in [0, {self.n_zones})")
        return zone * self.alpha, (zone + 1) * self.alpha

    def zone_of(self, point) -> int:
        """Zone index containing `point` under the sector-membership rule."""
        if self.n_zones == 1:
            return 0
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        if dx == 0.0 and dy == 0.0:
            return 0
        theta = math.atan2(dy, dx)
        if theta < 0.0:
            theta += TWO_PI
        ratio = theta / self.alpha
        k = int(math.floor(ratio))
        if ratio == float(k):
            # exactly on a boundary ray: lower-indexed adjacent zone,
            # with the 0 (== 2*pi) ray belonging to zone 0
            return 0 if k % self.n_zones == 0 else k - 1
        if k >= self.n_zones:  # guards theta == 2*pi after rounding
            k = self.n_zones - 1
        return k

    def membership_inequalities(self, point, zone: int) -> tuple[float, float]:
        """The two sector-test expressions for `point` against `zone`'s edges.

        Membership in the interior means lower > 0 and upper < 0, where
        lower = (Y-Yv)cos(b1) - (X-Xv)sin(b1) and
        upper = (Y-Yv)cos(b2) - (X-Xv)sin(b2).
        """
        b1, b2 = self.boundaries(zone)
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        lower = dy * math.cos(b1) - dx * math.sin(b1)
        upper = dy * math.cos(b2) - dx * math.sin(b2)
        return lower, upper
