"""Compiled inner loops: collision gain/loss and the per-angle profiles of D.

Sigma nodes are passed as (cos theta, sin theta) per theta node plus the u
nodes as coordinates in the orthonormal frame of k; frames are rebuilt per
pair exactly as in :func:`lpboltz.geometry.orthonormal_frame`.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .interpolation import interp2, interp3


@njit(cache=True, inline="always")
def _frame(kx, ky, kz, N):
    if N == 2:
        return -ky, kx, 0.0, 0.0, 0.0, 0.0
    if abs(kx) < 0.9:
        ax, ay = 1.0, 0.0
    else:
        ax, ay = 0.0, 1.0
    d = ax * kx + ay * ky
    ex = ax - d * kx
    ey = ay - d * ky
    ez = -d * kz
    nrm = math.sqrt(ex * ex + ey * ey + ez * ez)
    ex /= nrm
    ey /= nrm
    ez /= nrm
    # second row: k x e1
    fx = ky * ez - kz * ey
    fy = kz * ex - kx * ez
    fz = kx * ey - ky * ex
    return ex, ey, ez, fx, fy, fz


@njit(cache=True, inline="always")
def _interp(c, x, y, z, N, n, order):
    if N == 2:
        val = interp2(c, x, y, n, order)
    else:
        val = interp3(c, x, y, z, n, order)
    return val if val > 0.0 else 0.0


@njit(cache=True, inline="always")
def _kin(wn, gamma):
    if gamma == 0.0:
        return 1.0
    if gamma == 1.0:
        return wn
    return wn ** gamma


@njit(cache=True)
def q_general(cf, cg, fv, gv, pts, n, R, h, order, gamma, ct, st, u1, u2, wts):
    """Gain and loss of Q(g, f) at every node: f at v', g at v'*."""
    P = pts.shape[0]
    N = pts.shape[1]
    S = ct.shape[0]
    gain = np.zeros(P)
    loss = np.zeros(P)
    wsum = 0.0
    for s in range(S):
        wsum += wts[s]
    inv_h = 1.0 / h
    off = R * inv_h - 0.5
    for i in range(P):
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2] if N == 3 else 0.0
        fi = fv[i]
        gi_acc = 0.0
        li_acc = 0.0
        for j in range(P):
            wx = vx - pts[j, 0]
            wy = vy - pts[j, 1]
            wz = (vz - pts[j, 2]) if N == 3 else 0.0
            wn = math.sqrt(wx * wx + wy * wy + wz * wz)
            if wn == 0.0:
                if gamma == 0.0:
                    gi_acc += wsum * fi * gv[j]
                    li_acc += wsum * fi * gv[j]
                continue
            kin = _kin(wn, gamma)
            li_acc += kin * wsum * fi * gv[j]
            kx = wx / wn
            ky = wy / wn
            kz = wz / wn
            ex, ey, ez, fx, fy, fz = _frame(kx, ky, kz, N)
            cx = 0.5 * (vx + pts[j, 0])
            cy = 0.5 * (vy + pts[j, 1])
            cz = 0.5 * (vz + pts[j, 2]) if N == 3 else 0.0
            half = 0.5 * wn
            acc = 0.0
            for s in range(S):
                sx = ct[s] * kx + st[s] * (u1[s] * ex + u2[s] * fx)
                sy = ct[s] * ky + st[s] * (u1[s] * ey + u2[s] * fy)
                sz = ct[s] * kz + st[s] * (u1[s] * ez + u2[s] * fz)
                a = _interp(cf, (cx + half * sx) * inv_h + off, (cy + half * sy) * inv_h + off,
                            (cz + half * sz) * inv_h + off, N, n, order)
                if a == 0.0:
                    continue
                b = _interp(cg, (cx - half * sx) * inv_h + off, (cy - half * sy) * inv_h + off,
                            (cz - half * sz) * inv_h + off, N, n, order)
                acc += wts[s] * a * b
            gi_acc += kin * acc
        gain[i] = gi_acc
        loss[i] = li_acc
    return gain, loss


@njit(cache=True)
def q_symmetric(cf, fv, pts, n, R, h, order, gamma, ct, st, u1, u2, wts):
    """Gain and loss of Q(f, f), visiting each unordered pair once.

    The sigma-node set for the pair (j, i) is the point reflection of the
    set for (i, j), so both orderings share the same sum of f(v')f(v'*).
    """
    P = pts.shape[0]
    N = pts.shape[1]
    S = ct.shape[0]
    gain = np.zeros(P)
    loss = np.zeros(P)
    wsum = 0.0
    for s in range(S):
        wsum += wts[s]
    inv_h = 1.0 / h
    off = R * inv_h - 0.5
    for i in range(P):
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2] if N == 3 else 0.0
        fi = fv[i]
        if gamma == 0.0:
            gain[i] += wsum * fi * fi
            loss[i] += wsum * fi * fi
        for j in range(i + 1, P):
            wx = vx - pts[j, 0]
            wy = vy - pts[j, 1]
            wz = (vz - pts[j, 2]) if N == 3 else 0.0
            wn = math.sqrt(wx * wx + wy * wy + wz * wz)
            kin = _kin(wn, gamma)
            lij = kin * wsum * fi * fv[j]
            loss[i] += lij
            loss[j] += lij
            kx = wx / wn
            ky = wy / wn
            kz = wz / wn
            ex, ey, ez, fx, fy, fz = _frame(kx, ky, kz, N)
            cx = 0.5 * (vx + pts[j, 0])
            cy = 0.5 * (vy + pts[j, 1])
            cz = 0.5 * (vz + pts[j, 2]) if N == 3 else 0.0
            half = 0.5 * wn
            acc = 0.0
            for s in range(S):
                sx = ct[s] * kx + st[s] * (u1[s] * ex + u2[s] * fx)
                sy = ct[s] * ky + st[s] * (u1[s] * ey + u2[s] * fy)
                sz = ct[s] * kz + st[s] * (u1[s] * ez + u2[s] * fz)
                a = _interp(cf, (cx + half * sx) * inv_h + off, (cy + half * sy) * inv_h + off,
                            (cz + half * sz) * inv_h + off, N, n, order)
                if a == 0.0:
                    continue
                b = _interp(cf, (cx - half * sx) * inv_h + off, (cy - half * sy) * inv_h + off,
                            (cz - half * sz) * inv_h + off, N, n, order)
                acc += wts[s] * a * b
            acc *= kin
            gain[i] += acc
            gain[j] += acc
    return gain, loss


@njit(cache=True, inline="always")
def _pow(x, e):
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.5:
        return math.sqrt(x)
    if e == 0.0:
        return 1.0
    return x ** e


@njit(cache=True)
def d_profiles(cf, fv, gmat, pts, n, R, h, order, gammas, pexp, alphas,
               ct, st, u1, u2, uw, rel_skip):
    """Per-theta-node profiles of the transformed Lyapunov integrand.

    For every second argument g (rows of gmat), exponent pair c = (p, alpha)
    and kinetic exponent gamma, accumulates over pairs (v_i, v_j) and u nodes
    (normalized weights ``uw``) at each theta node a:

      L[a]  = sum  f_i g_j |w|^gamma [<v'>^{2 alpha} f(v')^{p-1} - <v_i>^{2 alpha} f_i^{p-1}]
      R2[a] = sum  f_i^p g_j |w|^gamma [<v'>^{2 alpha} - <v_i>^{2 alpha}]
      G[a]  = sum  f_i g_j |w|^gamma <v'>^{2 alpha} f(v')^{p-1}

    and the theta-independent S = sum f_i^p <v_i>^{2 alpha} g_j |w|^gamma.
    Pairs with f_i or every g_j below ``rel_skip`` times the respective
    maximum are skipped.  Sums carry no cell-volume factors.
    """
    P = pts.shape[0]
    N = pts.shape[1]
    ng = gmat.shape[0]
    nk = gammas.shape[0]
    nc = pexp.shape[0]
    na = ct.shape[0]
    nu = u1.shape[0]
    L = np.zeros((ng, nc, nk, na))
    G = np.zeros((ng, nc, nk, na))
    R2 = np.zeros((ng, nc, nk, na))
    S = np.zeros((ng, nc, nk))
    inv_h = 1.0 / h
    off = R * inv_h - 0.5

    fmax = 0.0
    for i in range(P):
        fmax = max(fmax, fv[i])
    gmax = 0.0
    for r in range(ng):
        for j in range(P):
            gmax = max(gmax, gmat[r, j])
    if fmax == 0.0 or gmax == 0.0:
        return L, G, R2, S
    gkeep = np.zeros(P, dtype=np.bool_)
    for j in range(P):
        for r in range(ng):
            if gmat[r, j] > rel_skip * gmax:
                gkeep[j] = True

    wvi = np.empty(nc)
    fpi = np.empty(nc)
    loc_l = np.empty(nc)
    loc_r = np.empty(nc)
    loc_g = np.empty(nc)
    kin = np.empty(nk)
    for i in range(P):
        fi = fv[i]
        if fi <= rel_skip * fmax:
            continue
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2] if N == 3 else 0.0
        base_i = 1.0 + vx * vx + vy * vy + vz * vz
        for c in range(nc):
            wvi[c] = _pow(base_i, alphas[c])
            fpi[c] = _pow(fi, pexp[c])
        for j in range(P):
            if not gkeep[j]:
                continue
            wx = vx - pts[j, 0]
            wy = vy - pts[j, 1]
            wz = (vz - pts[j, 2]) if N == 3 else 0.0
            wn = math.sqrt(wx * wx + wy * wy + wz * wz)
            for k in range(nk):
                kin[k] = _kin(wn, gammas[k]) if wn > 0.0 else (1.0 if gammas[k] == 0.0 else 0.0)
            for r in range(ng):
                gj = gmat[r, j]
                for c in range(nc):
                    for k in range(nk):
                        S[r, c, k] += fpi[c] * wvi[c] * gj * kin[k]
            if wn == 0.0:
                continue  # v' = v_i for every sigma: profiles vanish
            kx = wx / wn
            ky = wy / wn
            kz = wz / wn
            ex, ey, ez, fx, fy, fz = _frame(kx, ky, kz, N)
            cx = 0.5 * (vx + pts[j, 0])
            cy = 0.5 * (vy + pts[j, 1])
            cz = 0.5 * (vz + pts[j, 2]) if N == 3 else 0.0
            half = 0.5 * wn
            for a in range(na):
                for c in range(nc):
                    loc_l[c] = 0.0
                    loc_r[c] = 0.0
                    loc_g[c] = 0.0
                for m in range(nu):
                    sx = ct[a] * kx + st[a] * (u1[m] * ex + u2[m] * fx)
                    sy = ct[a] * ky + st[a] * (u1[m] * ey + u2[m] * fy)
                    sz = ct[a] * kz + st[a] * (u1[m] * ez + u2[m] * fz)
                    px = cx + half * sx
                    py = cy + half * sy
                    pz = cz + half * sz
                    sval = _interp(cf, px * inv_h + off, py * inv_h + off, pz * inv_h + off,
                                   N, n, order)
                    base = 1.0 + px * px + py * py + pz * pz
                    for c in range(nc):
                        wv = _pow(base, alphas[c])
                        gterm = wv * _pow(sval, pexp[c] - 1.0) * fi
                        loc_g[c] += uw[m] * gterm
                        loc_l[c] += uw[m] * (gterm - wvi[c] * fpi[c])
                        loc_r[c] += uw[m] * (wv - wvi[c]) * fpi[c]
                for r in range(ng):
                    gj = gmat[r, j]
                    if gj == 0.0:
                        continue
                    for k in range(nk):
                        coef = gj * kin[k]
                        for c in range(nc):
                            L[r, c, k, a] += coef * loc_l[c]
                            G[r, c, k, a] += coef * loc_g[c]
                            R2[r, c, k, a] += coef * loc_r[c]
    return L, G, R2, S
