"""Numba-compiled implementations of the hot solver kernels.

Loop formulations of the same operations as _kernels_np, compiled with
nopython mode and on-disk caching.  Importing this module requires numba;
the dispatcher falls back to the numpy module otherwise.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def _ayy(a, y):
    # (A y^2)_ij = sum_kl a_ijkl y_k y_l
    n = a.shape[0]
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                for l in range(n):
                    s += a[i, j, k, l] * y[k] * y[l]
            M[i, j] = s
    return M


@njit(cache=True)
def _axx(a, x):
    # (A x^2)_kl = sum_ij a_ijkl x_i x_j
    n = a.shape[0]
    M = np.zeros((n, n))
    for k in range(n):
        for l in range(n):
            s = 0.0
            for i in range(n):
                for j in range(n):
                    s += a[i, j, k, l] * x[i] * x[j]
            M[k, l] = s
    return M


@njit(cache=True)
def _mixed(a, x, y):
    # W_im = sum_jk a_ijkm x_j y_k
    n = a.shape[0]
    W = np.zeros((n, n))
    for i in range(n):
        for m in range(n):
            s = 0.0
            for j in range(n):
                for k in range(n):
                    s += a[i, j, k, m] * x[j] * y[k]
            W[i, m] = s
    return W


@njit(cache=True)
def biquadratic_batch(a, X, Y):
    m, n = X.shape
    out = np.empty(m)
    for p in range(m):
        s = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        s += a[i, j, k, l] * X[p, i] * X[p, j] * Y[p, k] * Y[p, l]
        out[p] = s
    return out


@njit(cache=True)
def kkt_residual_grid(a, X, Y):
    mx, n = X.shape
    my = Y.shape[0]
    My = np.empty((my, n, n))
    for q in range(my):
        My[q] = _ayy(a, Y[q])
    Nx = np.empty((mx, n, n))
    for p in range(mx):
        Nx[p] = _axx(a, X[p])
    R = np.empty((mx, my))
    LAM = np.empty((mx, my))
    for p in range(mx):
        for q in range(my):
            lam = 0.0
            for i in range(n):
                vi = 0.0
                for j in range(n):
                    vi += My[q, i, j] * X[p, j]
                lam += vi * X[p, i]
            r = 0.0
            for i in range(n):
                vi = 0.0
                for j in range(n):
                    vi += My[q, i, j] * X[p, j]
                d = vi - lam * X[p, i]
                r += d * d
            for l in range(n):
                wl = 0.0
                for k in range(n):
                    wl += Nx[p, k, l] * Y[q, k]
                d = wl - lam * Y[q, l]
                r += d * d
            R[p, q] = np.sqrt(r)
            LAM[p, q] = lam
    return R, LAM


@njit(cache=True)
def wqz_power(a, x0, y0, max_iter, tol):
    n = a.shape[0]
    x = x0 / np.linalg.norm(x0)
    y = y0 / np.linalg.norm(y0)
    history = np.empty(max_iter)
    lam_prev = np.inf
    lam = 0.0
    converged = 0
    it = 0
    for it in range(1, max_iter + 1):
        M = _ayy(a, y)
        v = M @ x
        x = v / np.linalg.norm(v)
        N = _axx(a, x)
        w = N @ y
        y = w / np.linalg.norm(w)
        lam = y @ (N @ y)
        history[it - 1] = lam
        if np.abs(lam - lam_prev) <= tol * max(1.0, np.abs(lam)):
            M = _ayy(a, y)
            r1 = 0.0
            r2 = 0.0
            for i in range(n):
                vi = 0.0
                wi = 0.0
                for j in range(n):
                    vi += M[i, j] * x[j]
                    wi += N[j, i] * y[j]
                r1 = max(r1, np.abs(vi - lam * x[i]))
                r2 = max(r2, np.abs(wi - lam * y[i]))
            if max(r1, r2) <= tol:
                converged = 1
                break
        lam_prev = lam
    return lam, x, y, it, converged, history[:it].copy()


@njit(cache=True)
def _newton_refine_one(a, x0, y0, max_steps, ftol):
    n = a.shape[0]
    k = 2 * n + 2
    x = x0.copy()
    y = y0.copy()
    lam = 0.0
    for i in range(n):
        for j in range(n):
            for p in range(n):
                for q in range(n):
                    lam += a[i, j, p, q] * x[i] * x[j] * y[p] * y[q]
    mu = lam
    F = np.empty(k)
    J = np.empty((k, k))
    res = np.inf
    conv = 0
    for _ in range(max_steps):
        My = _ayy(a, y)
        Nx = _axx(a, x)
        for i in range(n):
            vi = 0.0
            for j in range(n):
                vi += My[i, j] * x[j]
            F[i] = vi - lam * x[i]
        for l in range(n):
            wl = 0.0
            for kk in range(n):
                wl += Nx[kk, l] * y[kk]
            F[n + l] = wl - mu * y[l]
        F[2 * n] = x @ x - 1.0
        F[2 * n + 1] = y @ y - 1.0
        res = np.abs(F).max()
        if not np.isfinite(res):
            res = np.inf
            break
        if res <= ftol:
            conv = 1
            break
        W = _mixed(a, x, y)
        J[:, :] = 0.0
        for i in range(n):
            for j in range(n):
                J[i, j] = My[i, j]
                J[i, n + j] = 2.0 * W[i, j]
                J[n + i, j] = 2.0 * W[j, i]
                J[n + i, n + j] = Nx[i, j]
            J[i, i] -= lam
            J[n + i, n + i] -= mu
            J[i, 2 * n] = -x[i]
            J[n + i, 2 * n + 1] = -y[i]
            J[2 * n, i] = 2.0 * x[i]
            J[2 * n + 1, n + i] = 2.0 * y[i]
        d = np.linalg.det(J)
        if not np.isfinite(d) or d == 0.0:
            break
        dz = np.linalg.solve(J, -F)
        x = x + dz[:n]
        y = y + dz[n:2 * n]
        lam += dz[2 * n]
        mu += dz[2 * n + 1]
    return x, y, lam, mu, res, conv


@njit(cache=True)
def newton_refine_batch(a, X0, Y0, max_steps, ftol):
    m, n = X0.shape
    X = np.empty((m, n))
    Y = np.empty((m, n))
    LAM = np.empty(m)
    MU = np.empty(m)
    RES = np.empty(m)
    CONV = np.empty(m, dtype=np.int8)
    for p in range(m):
        x, y, lam, mu, res, conv = _newton_refine_one(
            a, X0[p], Y0[p], max_steps, ftol
        )
        X[p] = x
        Y[p] = y
        LAM[p] = lam
        MU[p] = mu
        RES[p] = res
        CONV[p] = conv
    return X, Y, LAM, MU, RES, CONV


@njit(cache=True)
def _unfold_x(t):
    n = t.shape[0]
    M = np.empty((n * n, n * n))
    for k in range(n):
        for i in range(n):
            for l in range(n):
                for j in range(n):
                    M[k * n + i, l * n + j] = t[i, j, k, l]
    return M


@njit(cache=True)
def _fold_x(M, n):
    t = np.empty((n, n, n, n))
    for k in range(n):
        for i in range(n):
            for l in range(n):
                for j in range(n):
                    t[i, j, k, l] = M[k * n + i, l * n + j]
    return t


@njit(cache=True)
def pocs_run(anchor, max_iter, res_tol, stall_window, stall_eps):
    n = anchor.shape[0]
    a_t = anchor.copy()
    b_t = anchor.copy()
    residuals = np.empty(max_iter)
    status = 2
    it = 0
    for it in range(1, max_iter + 1):
        M = _unfold_x(a_t)
        M = 0.5 * (M + M.T)
        w, V = np.linalg.eigh(M)
        for s in range(w.shape[0]):
            if w[s] < 0.0:
                w[s] = 0.0
        b_t = _fold_x((V * w) @ V.T, n)
        r = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        bw = 0.5 * (b_t[i, j, k, l] + b_t[j, i, l, k])
                        bws = 0.5 * (b_t[j, i, k, l] + b_t[i, j, l, k])
                        a_new = anchor[i, j, k, l] + 0.5 * (bw - bws)
                        a_t[i, j, k, l] = a_new
                        d = a_new - b_t[i, j, k, l]
                        r += d * d
        r = np.sqrt(r)
        residuals[it - 1] = r
        if r <= res_tol:
            status = 0
            break
        if it > stall_window:
            r_old = residuals[it - 1 - stall_window]
            if r_old - r <= stall_eps * max(r_old, 1e-300):
                status = 1
                break
    return a_t, b_t, residuals[:it].copy(), it, status
