"""
Angle <-> (sin, cos) codec used for network targets and outputs.
"""

import math

import numpy as np

AMBIGUOUS_NORM = 1e-12


class UndefinedAngleError(ValueError):
    """An UNDEFINED angle was passed where a target is required."""


class AmbiguousAngleError(ValueError):
    """A (sin, cos) pair too close to the origin to carry a direction."""


def wrap_degrees(angle):
    """Map degrees into (-180, 180]."""
    wrapped = np.mod(np.asarray(angle, dtype=np.float64) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped <= -180.0, 180.0, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def encode_angle(theta: float | None) -> tuple[float, float]:
    if theta is None or not math.isfinite(theta):
        raise UndefinedAngleError(f"cannot encode undefined angle {theta!r}")
    rad = math.radians(theta)
    return math.sin(rad), math.cos(rad)


def decode_angle(s: float, c: float) -> float:
    if abs(s) < AMBIGUOUS_NORM and abs(c) < AMBIGUOUS_NORM:
        raise AmbiguousAngleError(f"(sin, cos) = ({s}, {c}) has no direction")
    angle = math.degrees(math.atan2(s, c))
    return 180.0 if angle <= -180.0 else angle


# ------------------------------------------------------------------
def encode_angles(thetas) -> np.ndarray:
    """(..., ) degrees -> (..., 2) [sin, cos]."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if not np.all(np.isfinite(thetas)):
        raise UndefinedAngleError("cannot encode undefined angles")
    rad = np.radians(thetas)
    return np.stack([np.sin(rad), np.cos(rad)], axis=-1)


def decode_angles(s, c) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if np.any((np.abs(s) < AMBIGUOUS_NORM) & (np.abs(c) < AMBIGUOUS_NORM)):
        raise AmbiguousAngleError("one or more (sin, cos) pairs have no direction")
    angles = np.degrees(np.arctan2(s, c))
    return np.where(angles <= -180.0, 180.0, angles)
