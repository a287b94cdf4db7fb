"""Reflection maps and direction helpers for the half space {x3 > 0}.

Axis indices in the public API are 1-based (1, 2, 3).  Every function accepts
either a single 3-vector or an array of shape (..., 3).
"""
from __future__ import annotations

import numpy as np

#: Sign pattern of the reflection x -> (x1, x2, -x3), indexed 0..2.
PARITY = np.array([1.0, 1.0, -1.0])

UNIT_TOL = 1e-12
COINCIDENT_TOL = 1e-14


def as_vec3(x) -> np.ndarray:
    """Return ``x`` as a float array with a trailing axis of length 3."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite component in 3-vector")
    return arr


def reflect(x) -> np.ndarray:
    """Mirror image through the wall: (x1, x2, x3) -> (x1, x2, -x3)."""
    return as_vec3(x) * PARITY


def mirror_direction(omega) -> np.ndarray:
    """Reflect a unit direction; rejects vectors that are not unit length."""
    omega = as_vec3(omega)
    norm = np.linalg.norm(omega, axis=-1)
    if np.any(np.abs(norm - 1.0) > UNIT_TOL):
        raise ValueError("mirror_direction expects a unit vector")
    return omega * PARITY


def parity(i: int) -> float:
    """+1 for the tangential axes 1, 2 and -1 for the normal axis 3."""
    if i not in (1, 2, 3):
        raise ValueError(f"axis index must be 1, 2 or 3, got {i!r}")
    return float(PARITY[i - 1])


def unit_from_to(x, y) -> np.ndarray:
    """Unit vector pointing from ``x`` toward ``y``."""
    d = as_vec3(y) - as_vec3(x)
    dist = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(dist <= COINCIDENT_TOL):
        raise ValueError("unit_from_to called with coincident points")
    return d / dist


def cross(a, b) -> np.ndarray:
    """Cross product over the trailing axis, broadcasting like numpy."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )
