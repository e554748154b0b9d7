"""Distance kernels: point-to-segment, point-to-polyline, angles.

All kernels are vectorized over the query points (leading axes of ``y``);
segment endpoints are single points.
"""

from __future__ import annotations

import numpy as np


def point_segment_distance(y: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance from y (..., d) to the segment [a, b].

    Uses the projection parameter clamped to [0, 1]; degenerate segments
    (a == b) fall back to the point distance.
    """
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(y - a, axis=-1)
    t = np.clip((y - a) @ ab / denom, 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(y - closest, axis=-1)


def segment_projection_parameter(y: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Clamped projection parameter in [0, 1] of y onto [a, b]."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.zeros(y.shape[:-1])
    return np.clip((y - a) @ ab / denom, 0.0, 1.0)


def point_polyline_distance(y: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Distance from y (..., d) to the polyline through ``vertices`` (K, d)."""
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) == 1:
        return np.linalg.norm(np.asarray(y, float) - vertices[0], axis=-1)
    best = None
    for a, b in zip(vertices[:-1], vertices[1:]):
        d = point_segment_distance(y, a, b)
        best = d if best is None else np.minimum(best, d)
    return best


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def angle_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle between unit vectors, accurate for small angles.

    ||a - b|| = 2 sin(theta / 2), which avoids the arccos precision cliff
    near zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    chord = np.linalg.norm(a - b, axis=-1)
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
