"""2D geometry: route polylines, oriented-rectangle overlap, crossings.

Routes are piecewise-linear; agents are addressed by arc length along
their route. Rectangle overlap uses the separating-axis test and returns
the minimal penetration depth, which the simulator logs as overlap_depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .state import ConflictZone


@dataclass
class Route:
    """A polyline route addressed by arc length.

    Positions past the final vertex continue along the last segment
    direction, so agents simply drive out of the scene.
    """

    points: np.ndarray  # (k, 2), k >= 2

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 2:
            raise ValueError("route needs at least two points")
        deltas = np.diff(self.points, axis=0)
        seg_lengths = np.hypot(deltas[:, 0], deltas[:, 1])
        if np.any(seg_lengths <= 0):
            raise ValueError("route has a zero-length segment")
        self._seg_lengths = seg_lengths
        self._cum = np.concatenate([[0.0], np.cumsum(seg_lengths)])
        self._dirs = deltas / seg_lengths[:, None]

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def _segment_index(self, s: float) -> int:
        if s <= 0.0:
            return 0
        if s >= self._cum[-1]:
            return len(self._seg_lengths) - 1
        return int(np.searchsorted(self._cum, s, side="right") - 1)

    def position_at(self, s: float) -> np.ndarray:
        i = self._segment_index(s)
        return self.points[i] + (s - self._cum[i]) * self._dirs[i]

    def direction_at(self, s: float) -> np.ndarray:
        return self._dirs[self._segment_index(s)].copy()

    def heading_at(self, s: float) -> float:
        d = self.direction_at(s)
        return float(np.arctan2(d[1], d[0]))

    def arc_length_of(self, p: np.ndarray, s_min: float = 0.0) -> Optional[float]:
        """Arc length of the closest on-route point at or beyond s_min.

        Returns None if the point is farther than 5 m from every segment
        (clearly off this route).
        """
        p = np.asarray(p, dtype=float)
        best_s, best_d = None, 5.0
        for i in range(len(self._seg_lengths)):
            a = self.points[i]
            t = float(np.dot(p - a, self._dirs[i]))
            t = min(max(t, 0.0), self._seg_lengths[i])
            s = self._cum[i] + t
            if s < s_min:
                continue
            d = float(np.hypot(*(p - (a + t * self._dirs[i]))))
            if d < best_d:
                best_s, best_d = s, d
        return best_s

    def lateral_offset(self, p: np.ndarray) -> float:
        """Distance from a point to the route polyline."""
        p = np.asarray(p, dtype=float)
        best = np.inf
        for i in range(len(self._seg_lengths)):
            a = self.points[i]
            t = float(np.dot(p - a, self._dirs[i]))
            t = min(max(t, 0.0), self._seg_lengths[i])
            best = min(best, float(np.hypot(*(p - (a + t * self._dirs[i])))))
        return best

    def zone_entry_exit(self, zone: ConflictZone) -> tuple[float, float]:
        """Arc lengths at which the route first enters / last leaves the zone.

        Computed analytically per segment (slab clipping) and cached per
        zone, since the simulator asks every tick.
        """
        key = (zone.x_min, zone.x_max, zone.y_min, zone.y_max)
        cache = getattr(self, "_zone_cache", None)
        if cache is None:
            cache = {}
            object.__setattr__(self, "_zone_cache", cache)
        if key in cache:
            return cache[key]
        entry, exit_ = np.inf, -np.inf
        for i in range(len(self._seg_lengths)):
            a, d, length = self.points[i], self._dirs[i], self._seg_lengths[i]
            t_min, t_max = 0.0, length
            ok = True
            for axis, (lo, hi) in enumerate(((zone.x_min, zone.x_max),
                                             (zone.y_min, zone.y_max))):
                if abs(d[axis]) < 1e-12:
                    if a[axis] < lo or a[axis] > hi:
                        ok = False
                        break
                else:
                    t0 = (lo - a[axis]) / d[axis]
                    t1 = (hi - a[axis]) / d[axis]
                    if t0 > t1:
                        t0, t1 = t1, t0
                    t_min, t_max = max(t_min, t0), min(t_max, t1)
            if ok and t_min <= t_max:
                entry = min(entry, self._cum[i] + t_min)
                exit_ = max(exit_, self._cum[i] + t_max)
        if not np.isfinite(entry):
            raise ValueError("route never crosses the conflict zone")
        result = (float(entry), float(exit_))
        cache[key] = result
        return result


def rect_corners(center: np.ndarray, half_extent: np.ndarray, heading: float) -> np.ndarray:
    """Corners of an oriented rectangle, CCW. half_extent[0] is along heading."""
    c, s = np.cos(heading), np.sin(heading)
    rot = np.array([[c, -s], [s, c]])
    hx, hy = float(half_extent[0]), float(half_extent[1])
    local = np.array([[hx, hy], [-hx, hy], [-hx, -hy], [hx, -hy]])
    return np.asarray(center, dtype=float) + local @ rot.T


def obb_overlap(corners_a: np.ndarray, corners_b: np.ndarray) -> Optional[float]:
    """Separating-axis overlap test for two oriented rectangles.

    Returns the minimal penetration depth if they overlap, else None.
    """
    min_depth = np.inf
    for corners in (corners_a, corners_b):
        for i in range(2):  # two unique edge normals per rectangle
            edge = corners[(i + 1) % 4] - corners[i]
            axis = np.array([-edge[1], edge[0]])
            axis = axis / np.hypot(*axis)
            proj_a = corners_a @ axis
            proj_b = corners_b @ axis
            overlap = min(proj_a.max(), proj_b.max()) - max(proj_a.min(), proj_b.min())
            if overlap <= 0:
                return None
            min_depth = min(min_depth, float(overlap))
    return min_depth


def point_in_obb(p: np.ndarray, center: np.ndarray, half_extent: np.ndarray,
                 heading: float) -> bool:
    """Point containment in an oriented rectangle (boundary counts)."""
    c, s = np.cos(heading), np.sin(heading)
    d = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    local_x = c * d[0] + s * d[1]
    local_y = -s * d[0] + c * d[1]
    return bool(abs(local_x) <= half_extent[0] and abs(local_y) <= half_extent[1])


def ray_rect_entry_distance(origin: np.ndarray, direction: np.ndarray,
                            zone: ConflictZone) -> Optional[float]:
    """Distance along a unit-direction ray to the zone boundary.

    Returns 0 if the origin is already inside, None if the ray misses.
    """
    origin = np.asarray(origin, dtype=float)
    if zone.contains(origin):
        return 0.0
    t_min, t_max = -np.inf, np.inf
    for axis, (lo, hi) in enumerate(((zone.x_min, zone.x_max), (zone.y_min, zone.y_max))):
        d, o = direction[axis], origin[axis]
        if abs(d) < 1e-12:
            if o < lo or o > hi:
                return None
        else:
            t0, t1 = (lo - o) / d, (hi - o) / d
            if t0 > t1:
                t0, t1 = t1, t0
            t_min, t_max = max(t_min, t0), min(t_max, t1)
    if t_max < t_min or t_max < 0:
        return None
    return float(max(t_min, 0.0))


def segment_intersection(a0: np.ndarray, a1: np.ndarray, b0: np.ndarray,
                         b1: np.ndarray) -> Optional[np.ndarray]:
    """Intersection point of two closed segments, or None."""
    r = a1 - a0
    s = b1 - b0
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return None
    q = b0 - a0
    t = (q[0] * s[1] - q[1] * s[0]) / denom
    u = (q[0] * r[1] - q[1] * r[0]) / denom
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return a0 + t * r
    return None


__all__ = [
    "Route",
    "obb_overlap",
    "point_in_obb",
    "ray_rect_entry_distance",
    "rect_corners",
    "segment_intersection",
]
