"""Planar rotation and angle utilities.

All angles are in radians. Headings live in (-pi, pi], with -pi wrapped to
+pi. Rotations are counterclockwise about the origin.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi

# Quarter turn, used throughout the barrier derivative formulas.
S = np.array([[0.0, -1.0], [1.0, 0.0]])


class DegenerateGeometryError(ValueError):
    """A geometric quantity is undefined: coincident points, zero mean
    velocity, or a pair inside the excluded ball around the partner."""


def rot(theta: float) -> np.ndarray:
    """Counterclockwise rotation matrix for an angle in radians."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]; -pi maps to +pi.

    Angles already in range are returned unchanged (bit-exact), so repeated
    wrapping does not drift.
    """
    if -math.pi < theta <= math.pi:
        return theta
    return math.pi - (math.pi - theta) % TWO_PI


def bearing(p_from, p_to) -> float:
    """Four-quadrant angle of the line of sight from ``p_from`` to ``p_to``."""
    dx = float(p_to[0]) - float(p_from[0])
    dy = float(p_to[1]) - float(p_from[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("bearing undefined for coincident points")
    return math.atan2(dy, dx)


def heading_vector(psi: float) -> np.ndarray:
    """Unit vector pointing along a heading."""
    return np.array([math.cos(psi), math.sin(psi)])


def mat_norm_2x2(m) -> float:
    """Spectral norm of a 2x2 matrix from the closed-form singular values.

    Avoids an iterative SVD; used by the property tests on rotation bounds.
    """
    a, b = float(m[0][0]), float(m[0][1])
    c, d = float(m[1][0]), float(m[1][1])
    frob2 = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = frob2 * frob2 - 4.0 * det * det
    if disc < 0.0:  # roundoff on near-conformal matrices
        disc = 0.0
    return math.sqrt(0.5 * (frob2 + math.sqrt(disc)))
