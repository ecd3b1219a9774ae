"""Off-grid evaluation of grid data: multilinear (order 1) or cubic B-spline (order 3).

Nodes sit at v_k = -R + (k + 1/2) h, so the continuous index of a velocity
component x is (x + R)/h - 1/2.  Outside the box [-R, R]^N the field is 0;
between the outermost node and the box face it is interpolated against zero
ghost values.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.ndimage import spline_filter

PAD = 3  # ghost layers; cubic stencils reach two nodes beyond the box


def prepare(values: np.ndarray, order: int) -> np.ndarray:
    """Zero-padded coefficient array for :func:`interp2` / :func:`interp3`.

    Always three-dimensional (2-D data gets a trailing axis of length 1) so
    that compiled callers type-check both dimension branches.
    """
    if order not in (1, 3):
        raise ValueError("interpolation order must be 1 or 3")
    padded = np.pad(np.asarray(values, dtype=float), PAD)
    if order == 3:
        padded = spline_filter(padded, order=3, mode="grid-constant")
    if padded.ndim == 2:
        padded = padded[:, :, None]
    return np.ascontiguousarray(padded)


@njit(cache=True, inline="always")
def _bspline_weights(t):
    t2 = t * t
    t3 = t2 * t
    w0 = (1.0 - t) ** 3 / 6.0
    w1 = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0
    w2 = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0
    w3 = t3 / 6.0
    return w0, w1, w2, w3


@njit(cache=True)
def interp2(c, x, y, n, order):
    if x < -0.5 or y < -0.5 or x > n - 0.5 or y > n - 0.5:
        return 0.0
    i0 = int(math.floor(x))
    j0 = int(math.floor(y))
    tx = x - i0
    ty = y - j0
    i0 += PAD
    j0 += PAD
    if order == 1:
        return ((1.0 - tx) * ((1.0 - ty) * c[i0, j0, 0] + ty * c[i0, j0 + 1, 0])
                + tx * ((1.0 - ty) * c[i0 + 1, j0, 0] + ty * c[i0 + 1, j0 + 1, 0]))
    ax0, ax1, ax2, ax3 = _bspline_weights(tx)
    ay0, ay1, ay2, ay3 = _bspline_weights(ty)
    s = 0.0
    for di in range(4):
        wx = ax0 if di == 0 else (ax1 if di == 1 else (ax2 if di == 2 else ax3))
        row = i0 - 1 + di
        s += wx * (ay0 * c[row, j0 - 1, 0] + ay1 * c[row, j0, 0]
                   + ay2 * c[row, j0 + 1, 0] + ay3 * c[row, j0 + 2, 0])
    return s


@njit(cache=True)
def interp3(c, x, y, z, n, order):
    if (x < -0.5 or y < -0.5 or z < -0.5
            or x > n - 0.5 or y > n - 0.5 or z > n - 0.5):
        return 0.0
    i0 = int(math.floor(x))
    j0 = int(math.floor(y))
    k0 = int(math.floor(z))
    tx = x - i0
    ty = y - j0
    tz = z - k0
    i0 += PAD
    j0 += PAD
    k0 += PAD
    if order == 1:
        s = 0.0
        for di in range(2):
            wx = tx if di else 1.0 - tx
            for dj in range(2):
                wy = ty if dj else 1.0 - ty
                s += wx * wy * ((1.0 - tz) * c[i0 + di, j0 + dj, k0]
                                + tz * c[i0 + di, j0 + dj, k0 + 1])
        return s
    wxs = _bspline_weights(tx)
    wys = _bspline_weights(ty)
    wzs = _bspline_weights(tz)
    s = 0.0
    for di in range(4):
        for dj in range(4):
            w = wxs[di] * wys[dj]
            base_i = i0 - 1 + di
            base_j = j0 - 1 + dj
            s += w * (wzs[0] * c[base_i, base_j, k0 - 1] + wzs[1] * c[base_i, base_j, k0]
                      + wzs[2] * c[base_i, base_j, k0 + 1] + wzs[3] * c[base_i, base_j, k0 + 2])
    return s


@njit(cache=True)
def _sample_many2(c, idx, n, order):
    out = np.empty(idx.shape[0])
    for m in range(idx.shape[0]):
        out[m] = interp2(c, idx[m, 0], idx[m, 1], n, order)
    return out


@njit(cache=True)
def _sample_many3(c, idx, n, order):
    out = np.empty(idx.shape[0])
    for m in range(idx.shape[0]):
        out[m] = interp3(c, idx[m, 0], idx[m, 1], idx[m, 2], n, order)
    return out


def sample(f, points: np.ndarray, order: int = 1) -> np.ndarray:
    """Interpolate a Distribution at arbitrary velocities (rows of ``points``)."""
    grid = f.grid
    idx = (np.atleast_2d(points) + grid.R) / grid.h - 0.5
    c = prepare(f.values, order)
    idx = np.ascontiguousarray(idx, dtype=float)
    if grid.N == 2:
        return _sample_many2(c, idx, grid.n, order)
    return _sample_many3(c, idx, grid.n, order)
