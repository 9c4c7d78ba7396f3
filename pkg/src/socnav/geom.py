"""Planar geometry primitives shared by the simulator.

Coordinates are meters in a fixed world frame (x right, y up). Angles are
radians, counter-clockwise positive, and normalized to (-pi, pi]. Scalar
operations work on :class:`Vec2`/:class:`Pose2`/:class:`Segment`; the
``*_batch`` helpers are numpy-vectorized equivalents used on hot paths
(scans, wall forces, visibility) and are cross-checked against the scalar
forms in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Tolerance below which two directions are treated as parallel.
PARALLEL_EPS = 1e-12


def normalize_angle(angle: float) -> float:
    """Wrap an angle to the interval (-pi, pi].

    Parameters
    ----------
    angle : float
        Angle in radians, any magnitude.

    Returns
    -------
    float
        Equivalent angle in (-pi, pi].
    """
    r = math.remainder(angle, TWO_PI)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True, slots=True)
class Vec2:
    """Immutable 2D vector with finite components."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vector components ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """z-component of the 3D cross product."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def normalized(self) -> "Vec2":
        n = self.norm()
        if n < PARALLEL_EPS:
            raise ValueError("cannot normalize a zero vector")
        return Vec2(self.x / n, self.y / n)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Pose2:
    """Position plus heading; the heading is normalized at construction."""

    position: Vec2
    heading: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.heading):
            raise ValueError(f"non-finite heading {self.heading}")
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True, slots=True)
class Segment:
    """Line segment with distinct endpoints."""

    a: Vec2
    b: Vec2

    def __post_init__(self) -> None:
        if self.a.x == self.b.x and self.a.y == self.b.y:
            raise ValueError("degenerate segment: endpoints coincide")

    def length(self) -> float:
        return self.a.dist(self.b)


def heading_to_vector(heading: float) -> Vec2:
    """Unit vector pointing along ``heading``."""
    return Vec2(math.cos(heading), math.sin(heading))


def rotate(v: Vec2, angle: float) -> Vec2:
    """Rotate a vector counter-clockwise by ``angle`` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)


def transform_to_frame(p: Vec2, frame: Pose2) -> Vec2:
    """Express a world point in the coordinate frame of ``frame``.

    Applies R(-theta) @ (p - frame.position), so a point one meter ahead
    of the frame origin along its heading maps to (1, 0).
    """
    d = p - frame.position
    c, s = math.cos(frame.heading), math.sin(frame.heading)
    return Vec2(c * d.x + s * d.y, -s * d.x + c * d.y)


def transform_from_frame(p: Vec2, frame: Pose2) -> Vec2:
    """Inverse of :func:`transform_to_frame`."""
    c, s = math.cos(frame.heading), math.sin(frame.heading)
    return Vec2(c * p.x - s * p.y + frame.position.x, s * p.x + c * p.y + frame.position.y)


def point_segment_distance(p: Vec2, seg: Segment) -> float:
    """Euclidean distance from a point to the closest point of a segment.

    Returns
    -------
    float
        Distance; 0 when ``p`` lies on the segment.
    """
    ab = seg.b - seg.a
    t = (p - seg.a).dot(ab) / ab.dot(ab)
    t = min(1.0, max(0.0, t))
    closest = seg.a + ab * t
    return p.dist(closest)


def closest_point_on_segment(p: Vec2, seg: Segment) -> Vec2:
    """Closest point of ``seg`` to ``p``."""
    ab = seg.b - seg.a
    t = (p - seg.a).dot(ab) / ab.dot(ab)
    t = min(1.0, max(0.0, t))
    return seg.a + ab * t


def ray_segment_intersect(origin: Vec2, direction: Vec2, seg: Segment) -> float | None:
    """Smallest non-negative ray parameter where a ray meets a segment.

    Parameters
    ----------
    origin : Vec2
        Ray origin.
    direction : Vec2
        Unit direction of the ray.
    seg : Segment
        Target segment.

    Returns
    -------
    float or None
        Distance t >= 0 such that origin + t * direction lies on ``seg``,
        or None when there is no hit. A ray collinear with the segment and
        overlapping it returns the distance to the nearest endpoint, which
        keeps grazing scan rays deterministic.
    """
    r = seg.b - seg.a
    rel = seg.a - origin
    denom = direction.cross(r)
    if abs(denom) > PARALLEL_EPS:
        t = rel.cross(r) / denom
        u = rel.cross(direction) / denom
        if t >= 0.0 and 0.0 <= u <= 1.0:
            return t
        return None
    # Parallel: hit only if collinear, then the nearest endpoint wins.
    if abs(rel.cross(direction)) > PARALLEL_EPS:
        return None
    ta = (seg.a - origin).dot(direction)
    tb = (seg.b - origin).dot(direction)
    hits = [t for t in (ta, tb) if t >= 0.0]
    if not hits:
        return None
    return min(hits)


def segments_cross(p: Vec2, q: Vec2, seg: Segment) -> bool:
    """Whether the open segment p->q intersects the closed segment ``seg``.

    Open on the p->q side: touching ``seg`` exactly at p or q does not
    count as a crossing. Used for sight lines and nav-edge validation.
    """
    d = q - p
    r = seg.b - seg.a
    rel = seg.a - p
    denom = d.cross(r)
    if abs(denom) > PARALLEL_EPS:
        t = rel.cross(r) / denom
        u = rel.cross(d) / denom
        return 0.0 < t < 1.0 and 0.0 <= u <= 1.0
    if abs(rel.cross(d)) > PARALLEL_EPS:
        return False
    # Collinear: blocked if any interior part of p->q overlaps seg.
    dd = d.dot(d)
    if dd < PARALLEL_EPS:
        return False
    ta = (seg.a - p).dot(d) / dd
    tb = (seg.b - p).dot(d) / dd
    lo, hi = min(ta, tb), max(ta, tb)
    return max(lo, 0.0) < min(hi, 1.0)


# ---------------------------------------------------------------------------
# Vectorized batch forms. Segments are passed as an (M, 4) float array of
# [ax, ay, bx, by] rows; points as (N, 2).
# ---------------------------------------------------------------------------


def segments_to_array(segments: list[Segment]) -> np.ndarray:
    """Pack segments into an (M, 4) float64 array."""
    if not segments:
        return np.zeros((0, 4))
    return np.array([(s.a.x, s.a.y, s.b.x, s.b.y) for s in segments], dtype=np.float64)


def point_segment_distance_batch(points: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Distances from N points to M segments, shape (N, M)."""
    if segs.shape[0] == 0:
        return np.full((points.shape[0], 0), np.inf)
    a = segs[:, 0:2][None, :, :]          # (1, M, 2)
    ab = (segs[:, 2:4] - segs[:, 0:2])[None, :, :]
    ap = points[:, None, :] - a           # (N, M, 2)
    denom = np.einsum("nmk,nmk->nm", ab, ab)
    t = np.einsum("nmk,nmk->nm", ap, ab) / denom
    np.clip(t, 0.0, 1.0, out=t)
    closest = a + t[:, :, None] * ab
    diff = points[:, None, :] - closest
    return np.sqrt(np.einsum("nmk,nmk->nm", diff, diff))


def closest_point_on_segment_batch(points: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Closest points of M segments to N query points, shape (N, M, 2)."""
    a = segs[:, 0:2][None, :, :]
    ab = (segs[:, 2:4] - segs[:, 0:2])[None, :, :]
    ap = points[:, None, :] - a
    denom = np.einsum("nmk,nmk->nm", ab, ab)
    t = np.einsum("nmk,nmk->nm", ap, ab) / denom
    np.clip(t, 0.0, 1.0, out=t)
    return a + t[:, :, None] * ab


def ray_segment_intersect_batch(origin: np.ndarray, dirs: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Minimum hit distance of R rays against M segments, shape (R,).

    Rays share one origin. Misses are np.inf. Collinear overlaps are
    resolved to the nearest endpoint, matching the scalar form.
    """
    n_rays = dirs.shape[0]
    if segs.shape[0] == 0:
        return np.full(n_rays, np.inf)
    a = segs[:, 0:2]
    r = segs[:, 2:4] - a                       # (M, 2)
    rel = a - origin[None, :]                  # (M, 2)
    denom = dirs[:, 0][:, None] * r[:, 1][None, :] - dirs[:, 1][:, None] * r[:, 0][None, :]
    rel_cross_r = rel[:, 0] * r[:, 1] - rel[:, 1] * r[:, 0]          # (M,)
    rel_cross_d = rel[None, :, 0] * dirs[:, 1][:, None] - rel[None, :, 1] * dirs[:, 0][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = rel_cross_r[None, :] / denom
        u = rel_cross_d / denom
    ok = (np.abs(denom) > PARALLEL_EPS) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(ok, t, np.inf)
    out = t.min(axis=1)

    # Collinear overlap fallback, rare enough to do sparsely.
    par = (np.abs(denom) <= PARALLEL_EPS) & (np.abs(rel_cross_d) <= PARALLEL_EPS)
    if par.any():
        for i, j in zip(*np.nonzero(par)):
            ta = float(np.dot(a[j] - origin, dirs[i]))
            tb = float(np.dot(a[j] + r[j] - origin, dirs[i]))
            cands = [x for x in (ta, tb) if x >= 0.0]
            if cands:
                out[i] = min(out[i], min(cands))
    return out


def ray_circle_intersect_batch(
    origin: np.ndarray, dirs: np.ndarray, centers: np.ndarray, radius: float
) -> np.ndarray:
    """Minimum hit distance of R rays against H discs, shape (R,).

    All discs share one radius. Rays starting inside a disc hit at t=0.
    """
    if centers.shape[0] == 0:
        return np.full(dirs.shape[0], np.inf)
    rel = centers - origin[None, :]                        # (H, 2)
    proj = dirs @ rel.T                                    # (R, H)
    d2 = np.einsum("hk,hk->h", rel, rel)[None, :]          # (1, H)
    perp2 = d2 - proj**2
    disc = radius * radius - perp2
    hit = disc >= 0.0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t_near = proj - sq
    t_far = proj + sq
    t = np.where(t_near >= 0.0, t_near, np.where(t_far >= 0.0, 0.0, np.inf))
    t = np.where(hit, t, np.inf)
    return t.min(axis=1)


def segments_cross_batch(p: np.ndarray, qs: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Whether each open segment p->q_i crosses any of the M segments.

    Parameters
    ----------
    p : ndarray, shape (2,)
        Shared first endpoint.
    qs : ndarray, shape (N, 2)
        Second endpoints.
    segs : ndarray, shape (M, 4)
        Obstacle segments.

    Returns
    -------
    ndarray of bool, shape (N,)
    """
    n = qs.shape[0]
    if segs.shape[0] == 0 or n == 0:
        return np.zeros(n, dtype=bool)
    d = qs - p[None, :]                                    # (N, 2)
    a = segs[:, 0:2]
    r = segs[:, 2:4] - a
    rel = a[None, :, :] - p[None, None, :]                 # (1, M, 2)
    denom = d[:, 0][:, None] * r[:, 1][None, :] - d[:, 1][:, None] * r[:, 0][None, :]
    rel_cross_r = rel[0, :, 0] * r[:, 1] - rel[0, :, 1] * r[:, 0]
    rel_cross_d = rel[0, None, :, 0] * d[:, 1, None] - rel[0, None, :, 1] * d[:, 0, None]
    rel_cross_d = rel_cross_d.reshape(n, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = rel_cross_r[None, :] / denom
        u = rel_cross_d / denom
    cross = (np.abs(denom) > PARALLEL_EPS) & (t > 0.0) & (t < 1.0) & (u >= 0.0) & (u <= 1.0)
    return cross.any(axis=1)
