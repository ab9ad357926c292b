"""Quaternion helpers, real-first convention q = [w, x, y, z].

All functions broadcast over leading axes; the quaternion lives in the
last axis (size 4). Pure imaginary quaternions double as su(2) elements.
"""
from __future__ import annotations

import numpy as np


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p*q, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qinv_unit(q: np.ndarray) -> np.ndarray:
    """Inverse of a unit quaternion (= conjugate)."""
    return qconj(q)


def qexp_pure(v: np.ndarray) -> np.ndarray:
    """exp of a pure imaginary quaternion (0, v); axis-angle closed form."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 4:
        v = v[..., 1:]
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    small = theta < 1e-300
    safe = np.where(small, 1.0, theta)
    sinc = np.where(small, 1.0, np.sin(safe) / safe)
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(theta[..., 0])
    out[..., 1:] = sinc * v
    return out


def pure(v3) -> np.ndarray:
    """Embed a 3-vector as the pure imaginary quaternion (0, v)."""
    v3 = np.asarray(v3, dtype=float)
    out = np.zeros(v3.shape[:-1] + (4,))
    out[..., 1:] = v3
    return out


def impart(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float)[..., 1:]


def qnormalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)
