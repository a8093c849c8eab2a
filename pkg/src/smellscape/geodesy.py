"""Spherical distance helpers (radius 6,371,000 m)."""
from __future__ import annotations

import numpy as np

EARTH_RADIUS_M = 6_371_000.0


def haversine(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters; broadcasts over array arguments."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dp / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def polyline_length(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.sum(haversine(pts[:-1, 0], pts[:-1, 1], pts[1:, 0], pts[1:, 1])))


def to_unit(lat, lon) -> np.ndarray:
    """Unit vectors on the sphere, shape ``(..., 3)``."""
    phi, lam = np.radians(lat), np.radians(lon)
    cphi = np.cos(phi)
    return np.stack([cphi * np.cos(lam), cphi * np.sin(lam), np.sin(phi)], axis=-1)


def _angle(u, v):
    """Angle between unit vectors, stable for tiny and near-antipodal angles."""
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def point_arc_distance(p, a, b):
    """Distance in meters from points `p` to great-circle arcs ``a -> b``.

    All arguments are unit vectors of shape ``(n, 3)`` (or broadcastable).
    The foot of the perpendicular is used when it falls inside the arc,
    otherwise the nearer endpoint.
    """
    p, a, b = np.broadcast_arrays(p, a, b)
    n = np.cross(a, b)
    nn = np.linalg.norm(n, axis=-1)
    safe = nn > 0
    n = np.where(safe[..., None], n / np.where(safe, nn, 1.0)[..., None], 0.0)
    s = np.sum(p * n, axis=-1)
    # foot of the perpendicular, projected onto the great circle
    q = p - s[..., None] * n
    inside = (safe
              & (np.sum(np.cross(a, q) * n, axis=-1) >= 0)
              & (np.sum(np.cross(q, b) * n, axis=-1) >= 0)
              & (np.linalg.norm(q, axis=-1) > 0))
    cross_track = np.abs(np.arcsin(np.clip(s, -1.0, 1.0)))
    ends = np.minimum(_angle(p, a), _angle(p, b))
    return EARTH_RADIUS_M * np.where(inside, np.minimum(cross_track, ends), ends)
