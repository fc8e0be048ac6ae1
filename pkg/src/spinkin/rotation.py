"""Rodrigues rotation of 3-vectors, vectorized over leading axes."""

import numpy as np


def rodrigues_rotate(vectors, axis, angle):
    """Rotate `vectors` (..., 3) about `axis` by `angle` (right-handed).

    `axis` may be a single 3-vector or broadcast against the leading axes of
    `vectors`; `angle` scalar or broadcastable.  A zero axis leaves vectors
    unchanged (no rotation to perform).
    """
    v = np.asarray(vectors, dtype=float)
    a = np.broadcast_to(np.asarray(axis, dtype=float), v.shape).copy()
    norm = np.linalg.norm(a, axis=-1, keepdims=True)
    safe = np.where(norm > 0.0, norm, 1.0)
    a /= safe
    ang = np.broadcast_to(np.asarray(angle, dtype=float), v.shape[:-1])[..., None]
    ang = np.where(norm > 0.0, ang, 0.0)
    cos_t = np.cos(ang)
    sin_t = np.sin(ang)
    return (v * cos_t
            + np.cross(a, v) * sin_t
            + a * np.sum(a * v, axis=-1, keepdims=True) * (1.0 - cos_t))
