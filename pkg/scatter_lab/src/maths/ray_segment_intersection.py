import numpy as np


def ray_segment_intersect(origin: np.ndarray, direction: np.ndarray,
                          vertex0: np.ndarray, vertex1: np.ndarray,
                          epsilon: float = 1e-12):
    """Ray parameter t > epsilon where the ray hits the segment, else None."""
    edge = vertex1 - vertex0
    a = direction[0] * edge[1] - direction[1] * edge[0]
    if abs(a) < epsilon:
        return None  # Ray is parallel to the segment

    s = vertex0 - origin
    t = (s[0] * edge[1] - s[1] * edge[0]) / a
    u = (s[0] * direction[1] - s[1] * direction[0]) / a
    if u < 0.0 or u > 1.0:
        return None
    if t > epsilon:
        return t
    return None


def ray_circle_intersect(origin: np.ndarray, direction: np.ndarray,
                         center: np.ndarray, radius: float,
                         epsilon: float = 1e-12):
    """Smallest t > epsilon with |origin + t*direction - center| = radius."""
    d = origin - center
    b = float(np.dot(direction, d))
    c = float(np.dot(d, d)) - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return None
    root = np.sqrt(disc)
    for t in (-b - root, -b + root):
        if t > epsilon:
            return t
    return None
