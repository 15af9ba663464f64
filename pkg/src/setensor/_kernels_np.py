"""Pure-numpy implementations of the hot solver kernels.

Fallback path used when numba is unavailable or disabled via the
SETENSOR_DISABLE_NUMBA environment flag.  Function signatures mirror
_kernels_nb exactly; batched operations are vectorized with einsum and
stacked linear algebra instead of explicit loops.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def biquadratic_batch(a, X, Y):
    """Evaluate A x^2 y^2 for each row pair (X[p], Y[p]). Returns (m,)."""
    return np.einsum("ijkl,pi,pj,pk,pl->p", a, X, X, Y, Y, optimize=True)


def kkt_residual_grid(a, X, Y):
    """Stationarity residual over the full grid of (x, y) pairs.

    For each pair, lam = A x^2 y^2 and the residual is
    ||A x y^2 - lam x||^2 + ||A x^2 y - lam y||^2 (square root returned).
    Returns (R, LAM) with shape (mx, my).
    """
    mx, n = X.shape
    my = Y.shape[0]
    My = np.einsum("ijkl,qk,ql->qij", a, Y, Y, optimize=True)  # A y^2 per y
    Nx = np.einsum("ijkl,pi,pj->pkl", a, X, X, optimize=True)  # A x^2 per x
    R = np.empty((mx, my))
    LAM = np.empty((mx, my))
    chunk = max(1, int(2_000_000 // max(1, my * n)))
    for lo in range(0, mx, chunk):
        hi = min(mx, lo + chunk)
        Xc = X[lo:hi]
        v1 = np.einsum("qab,pb->pqa", My, Xc, optimize=True)
        v2 = np.einsum("pab,qb->pqa", Nx[lo:hi], Y, optimize=True)
        lam = np.einsum("pqa,pa->pq", v1, Xc, optimize=True)
        r1 = v1 - lam[..., None] * Xc[:, None, :]
        r2 = v2 - lam[..., None] * Y[None, :, :]
        R[lo:hi] = np.sqrt(np.sum(r1 * r1, axis=2) + np.sum(r2 * r2, axis=2))
        LAM[lo:hi] = lam
    return R, LAM


def wqz_power(a, x0, y0, max_iter, tol):
    """Alternating power iteration for the largest M-eigenvalue.

    Expects a pre-shifted tensor whose biquadratic form is positive on the
    unit spheres.  Returns (lam, x, y, iters, converged, history) where
    history holds the iterate values A x^2 y^2, nondecreasing by
    construction.
    """
    n = a.shape[0]
    R = a.reshape(n * n, n * n)
    x = x0 / np.linalg.norm(x0)
    y = y0 / np.linalg.norm(y0)
    history = np.empty(max_iter)
    lam_prev = np.inf
    lam = 0.0
    converged = 0
    it = 0
    for it in range(1, max_iter + 1):
        M = (R @ np.multiply.outer(y, y).ravel()).reshape(n, n)
        v = M @ x
        x = v / np.linalg.norm(v)
        N = (R.T @ np.multiply.outer(x, x).ravel()).reshape(n, n)
        w = N @ y
        y = w / np.linalg.norm(w)
        lam = float(y @ (N @ y))
        history[it - 1] = lam
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            M = (R @ np.multiply.outer(y, y).ravel()).reshape(n, n)
            r1 = M @ x - lam * x
            r2 = N @ y - lam * y
            if max(np.abs(r1).max(), np.abs(r2).max()) <= tol:
                converged = 1
                break
        lam_prev = lam
    return lam, x, y, it, converged, history[:it].copy()


def newton_refine_batch(a, X0, Y0, max_steps, ftol):
    """Refine stationary-pair seeds with a square Newton iteration.

    Unknowns per seed are (x, y, lam, mu) with the two proportionality
    equations and the two unit-norm constraints; at a solution lam = mu.
    Returns (X, Y, LAM, MU, RES, CONV).
    """
    m, n = X0.shape
    k = 2 * n + 2
    X = np.array(X0, dtype=np.float64)
    Y = np.array(Y0, dtype=np.float64)
    LAM = biquadratic_batch(a, X, Y)
    MU = LAM.copy()
    eye = np.eye(n)
    eyek = np.eye(k)
    frozen = np.zeros(m, dtype=bool)

    def residuals():
        My = np.einsum("ijkl,pk,pl->pij", a, Y, Y, optimize=True)
        Nx = np.einsum("ijkl,pi,pj->pkl", a, X, X, optimize=True)
        F = np.empty((m, k))
        F[:, :n] = np.einsum("pij,pj->pi", My, X) - LAM[:, None] * X
        F[:, n:2 * n] = np.einsum("pkl,pk->pl", Nx, Y) - MU[:, None] * Y
        F[:, 2 * n] = np.einsum("pi,pi->p", X, X) - 1.0
        F[:, 2 * n + 1] = np.einsum("pi,pi->p", Y, Y) - 1.0
        return F, My, Nx

    RES = np.full(m, np.inf)
    # divergent seeds are expected (and filtered at the end): let their
    # intermediate overflows pass silently
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(max_steps):
            F, My, Nx = residuals()
            bad = ~np.isfinite(F).all(axis=1)
            F[bad] = 0.0
            RES = np.abs(F).max(axis=1)
            RES[bad] = np.inf
            frozen |= RES <= ftol
            if frozen.all():
                break
            W = np.einsum("ijkm,pj,pk->pim", a, X, Y, optimize=True)
            J = np.zeros((m, k, k))
            J[:, :n, :n] = My - LAM[:, None, None] * eye
            J[:, :n, n:2 * n] = 2.0 * W
            J[:, :n, 2 * n] = -X
            J[:, n:2 * n, :n] = 2.0 * W.transpose(0, 2, 1)
            J[:, n:2 * n, n:2 * n] = Nx - MU[:, None, None] * eye
            J[:, n:2 * n, 2 * n + 1] = -Y
            J[:, 2 * n, :n] = 2.0 * X
            J[:, 2 * n + 1, n:2 * n] = 2.0 * Y
            det = np.linalg.det(J)
            singular = bad | ~np.isfinite(det) | (det == 0.0)
            J[singular | frozen] = eyek
            F[singular | frozen] = 0.0
            dz = np.linalg.solve(J, -F[..., None])[..., 0]
            X += dz[:, :n]
            Y += dz[:, n:2 * n]
            LAM += dz[:, 2 * n]
            MU += dz[:, 2 * n + 1]

        F, _, _ = residuals()
        finite = np.isfinite(F).all(axis=1)
        RES = np.where(finite, np.abs(F).max(axis=1, initial=0.0), np.inf)
    CONV = (RES <= ftol).astype(np.int8)
    return X, Y, LAM, MU, RES, CONV


def _unfold_x(t):
    n = t.shape[0]
    return np.ascontiguousarray(t.transpose(2, 0, 3, 1).reshape(n * n, n * n))


def _fold_x(M, n):
    return np.ascontiguousarray(M.reshape(n, n, n, n).transpose(1, 3, 0, 2))


def pocs_run(anchor, max_iter, res_tol, stall_window, stall_eps):
    """Alternate projections between the entry-sum affine class and the
    cone of tensors with positive semidefinite unfolding.

    anchor: entries of the fully symmetric target tensor; the affine class
    consists of weakly symmetric tensors t with t_ijkl + t_jikl = 2*anchor.
    Starts from the anchor itself.  Returns (a_fin, b_fin, residuals, iters,
    status) with status 0 converged, 1 stalled, 2 iteration budget reached.
    """
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
        w = np.maximum(w, 0.0)
        b_t = _fold_x((V * w) @ V.T, n)
        bw = 0.5 * (b_t + b_t.transpose(1, 0, 3, 2))
        a_t = anchor + 0.5 * (bw - bw.transpose(1, 0, 2, 3))
        r = float(np.linalg.norm(a_t - b_t))
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
