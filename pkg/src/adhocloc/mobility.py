"""Random Waypoint trajectories and the relative-motion metrics built on them.

Trajectories are piecewise-linear knot sequences, so positions at arbitrary
times are exact interpolations rather than stepped approximations. Mobility is
quantified through the average separation A_i(t) of a node from all others and
its discrete variation M_i, averaged into the network mobility Mob.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Optional

import numpy as np

from . import kernels


class MobilityError(ValueError):
    """Bad metric parameters (too few nodes, bad window, non-positive mobility)."""


class UnknownNodeError(LookupError):
    pass


@dataclass
class Trajectory:
    """Knot times with matching coordinates; linear between knots, clamped outside."""

    times: list[float] = field(default_factory=list)
    xs: list[float] = field(default_factory=list)
    ys: list[float] = field(default_factory=list)

    def append(self, t: float, x: float, y: float) -> None:
        if self.times and t < self.times[-1]:
            raise ValueError("trajectory knots must be time-ordered")
        self.times.append(t)
        self.xs.append(x)
        self.ys.append(y)

    @property
    def end_time(self) -> float:
        return self.times[-1]

    def position(self, t: float) -> tuple[float, float]:
        times = self.times
        k = _bisect_right(times, t) - 1
        if k < 0:
            return self.xs[0], self.ys[0]
        if k >= len(times) - 1:
            return self.xs[-1], self.ys[-1]
        t0, t1 = times[k], times[k + 1]
        if t1 == t0:
            return self.xs[k], self.ys[k]
        w = (t - t0) / (t1 - t0)
        return (self.xs[k] + (self.xs[k + 1] - self.xs[k]) * w,
                self.ys[k] + (self.ys[k + 1] - self.ys[k]) * w)


def _bisect_right(seq, t):
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if t < seq[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


class RandomWaypointModel:
    """Random Waypoint Model over a rectangular area.

    Each node draws a uniform start, then repeats: pick a uniform destination,
    travel there at a uniform speed from [speed_min, speed_max], pause. Legs
    are generated lazily per node from that node's own RNG substream, so
    extension order never changes the draw sequence.
    """

    def __init__(self, n_nodes: int, width: float, height: float,
                 speed_min: float, speed_max: float, pause: float,
                 rng_for_node, horizon: float):
        if n_nodes < 1:
            raise MobilityError("need at least one node")
        if not (0 < speed_min <= speed_max):
            raise MobilityError("speeds must satisfy 0 < speed_min <= speed_max")
        if pause < 0:
            raise MobilityError("pause time must be >= 0")
        if width <= 0 or height <= 0:
            raise MobilityError("area dimensions must be positive")
        self.n_nodes = n_nodes
        self.width = width
        self.height = height
        self.speed_min = speed_min
        self.speed_max = speed_max
        self.pause = pause
        self.horizon = float(horizon)
        self._rngs = [rng_for_node(i) for i in range(n_nodes)]
        self.trajectories: list[Trajectory] = []
        for i in range(n_nodes):
            traj = Trajectory()
            rng = self._rngs[i]
            x = rng.uniform(0.0, width)
            y = rng.uniform(0.0, height)
            traj.append(0.0, x, y)
            self.trajectories.append(traj)
            self._extend_node(i, self.horizon)
        self._flat: Optional[tuple] = None

    @classmethod
    def from_trajectories(cls, trajectories: list[Trajectory], width: float = 0.0,
                          height: float = 0.0) -> "RandomWaypointModel":
        """Build a model around externally supplied trajectories (tests, replays)."""
        model = cls.__new__(cls)
        model.n_nodes = len(trajectories)
        model.width = width
        model.height = height
        model.speed_min = 0.0
        model.speed_max = 0.0
        model.pause = 0.0
        model.horizon = max(t.end_time for t in trajectories)
        model._rngs = []
        model.trajectories = trajectories
        model._flat = None
        return model

    def _extend_node(self, node: int, until: float) -> None:
        traj = self.trajectories[node]
        rng = self._rngs[node]
        while traj.end_time < until:
            x0, y0 = traj.xs[-1], traj.ys[-1]
            dest_x = rng.uniform(0.0, self.width)
            dest_y = rng.uniform(0.0, self.height)
            speed = rng.uniform(self.speed_min, self.speed_max)
            leg = math.hypot(dest_x - x0, dest_y - y0)
            if leg == 0.0:
                continue
            traj.append(traj.end_time + leg / speed, dest_x, dest_y)
            if self.pause > 0:
                traj.append(traj.end_time + self.pause, dest_x, dest_y)

    def ensure_horizon(self, t: float) -> None:
        if t <= self.horizon:
            return
        for i in range(self.n_nodes):
            if self._rngs:
                self._extend_node(i, t)
        self.horizon = t
        self._flat = None

    def _flat_arrays(self):
        if self._flat is None:
            offsets = np.zeros(self.n_nodes + 1, dtype=np.int64)
            for i, traj in enumerate(self.trajectories):
                offsets[i + 1] = offsets[i] + len(traj.times)
            knot_t = np.empty(offsets[-1], dtype=np.float64)
            knot_x = np.empty(offsets[-1], dtype=np.float64)
            knot_y = np.empty(offsets[-1], dtype=np.float64)
            for i, traj in enumerate(self.trajectories):
                s, e = offsets[i], offsets[i + 1]
                knot_t[s:e] = traj.times
                knot_x[s:e] = traj.xs
                knot_y[s:e] = traj.ys
            self._flat = (knot_t, knot_x, knot_y, offsets)
        return self._flat

    def positions(self, t: float) -> np.ndarray:
        """All node positions at time t as an (n, 2) array."""
        if t < 0:
            raise MobilityError(f"negative query time {t}")
        self.ensure_horizon(t)
        knot_t, knot_x, knot_y, offsets = self._flat_arrays()
        return kernels.positions_at(knot_t, knot_x, knot_y, offsets, t)

    def positions_block(self, times: np.ndarray) -> np.ndarray:
        self.ensure_horizon(float(times[-1]) if len(times) else 0.0)
        knot_t, knot_x, knot_y, offsets = self._flat_arrays()
        return kernels.positions_block(knot_t, knot_x, knot_y, offsets,
                                       np.asarray(times, dtype=np.float64))

    def position(self, node: int, t: float) -> tuple[float, float]:
        if not 0 <= node < self.n_nodes:
            raise UnknownNodeError(f"node {node} not in [0, {self.n_nodes})")
        self.ensure_horizon(t)
        return self.trajectories[node].position(t)


class MobilityBand(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


#: band boundaries: Mob in (0, 3] is low, (3, 8] medium, above 8 high
BAND_LOW_MAX = 3.0
BAND_MEDIUM_MAX = 8.0


def classify_mobility(mob: float) -> MobilityBand:
    if mob <= 0:
        raise MobilityError(f"mobility must be positive to classify, got {mob}")
    if mob <= BAND_LOW_MAX:
        return MobilityBand.LOW
    if mob <= BAND_MEDIUM_MAX:
        return MobilityBand.MEDIUM
    return MobilityBand.HIGH


def _sample_times(duration: float, dt: float) -> np.ndarray:
    if dt <= 0 or dt >= duration:
        raise MobilityError(f"need 0 < dt < duration, got dt={dt} duration={duration}")
    steps = int(math.floor((duration - dt) / dt + 1e-9)) + 1
    return np.arange(steps + 1, dtype=np.float64) * dt


def avg_separation(model: RandomWaypointModel, node: int, t: float) -> float:
    """Mean distance from `node` to every other node at time t."""
    if model.n_nodes < 2:
        raise MobilityError("average separation needs at least two nodes")
    if not 0 <= node < model.n_nodes:
        raise UnknownNodeError(f"node {node} not in [0, {model.n_nodes})")
    pos = model.positions(t)
    d = np.sqrt(((pos - pos[node]) ** 2).sum(axis=1))
    return float(d.sum() / (model.n_nodes - 1))


def separation_matrix(model: RandomWaypointModel, duration: float, dt: float) -> np.ndarray:
    """A_i(t) sampled on the metric grid: shape (samples, n_nodes)."""
    if model.n_nodes < 2:
        raise MobilityError("separation series needs at least two nodes")
    times = _sample_times(duration, dt)
    block = model.positions_block(times)
    return kernels.separation_series(block)


def node_mobility(model: RandomWaypointModel, node: int, duration: float, dt: float) -> float:
    """M_i: summed |A_i(t+dt) - A_i(t)| over the grid, normalised by (duration - dt)."""
    if not 0 <= node < model.n_nodes:
        raise UnknownNodeError(f"node {node} not in [0, {model.n_nodes})")
    series = separation_matrix(model, duration, dt)[:, node]
    return float(np.abs(np.diff(series)).sum() / (duration - dt))


def network_mobility(model: RandomWaypointModel, duration: float, dt: float) -> float:
    """Mob: the M_i averaged over all nodes."""
    series = separation_matrix(model, duration, dt)
    per_node = np.abs(np.diff(series, axis=0)).sum(axis=0) / (duration - dt)
    return float(per_node.mean())


def write_trajectory_csv(model: RandomWaypointModel, duration: float, dt: float,
                         fh: IO[str]) -> int:
    """Dump sampled positions as (node_id, t, x, y) rows; returns the row count."""
    times = np.arange(0.0, duration + dt / 2, dt)
    block = model.positions_block(times)
    writer = csv.writer(fh)
    writer.writerow(["node_id", "t", "x", "y"])
    rows = 0
    for node in range(model.n_nodes):
        for j, t in enumerate(times):
            writer.writerow([node, f"{t:.9g}", f"{block[j, node, 0]:.9g}", f"{block[j, node, 1]:.9g}"])
            rows += 1
    return rows
