import numpy as np


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    mag = np.linalg.norm(v)
    if mag > 0:
        return v / mag
    return v


def perp(v: np.ndarray) -> np.ndarray:
    """Counter-clockwise rotation by 90 degrees of a 2D vector."""
    return np.array([-v[1], v[0]], dtype=float)


def rotation_to(direction: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is `direction` (2D) or [+-1] (1D)."""
    direction = normalize(direction)
    if direction.size == 1:
        return np.array([[np.sign(direction[0]) or 1.0]])
    return np.column_stack([direction, perp(direction)])


def refract(incident: np.ndarray, normal: np.ndarray, eta: float):
    """Snell refraction of a unit direction.

    `normal` is a unit interface normal on the downstream side
    (normal . incident > 0), `eta` = c_down / c_up. Returns the refracted
    unit direction, or None on total internal reflection.
    """
    cos_i = float(np.dot(incident, normal))
    sin2_t = eta * eta * (1.0 - cos_i * cos_i)
    if sin2_t > 1.0:
        return None
    cos_t = np.sqrt(1.0 - sin2_t)
    return eta * (incident - cos_i * normal) + cos_t * normal
