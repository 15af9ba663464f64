"""M-eigenpair solvers.

An M-eigenpair of an elasticity-symmetric tensor is a triple (lam, x, y)
with unit vectors satisfying

    A x y^2 = lam * x,    A x^2 y = lam * y.

The extremal eigenvalues are the extrema of the biquadratic form over the
product of unit spheres, so strong ellipticity holds exactly when the
minimal M-eigenvalue is positive.  This module provides:

* power_method_max / power_method_min: shifted alternating power iteration
  with deterministic restarts,
* enumerate_spectrum: dense seeding of the sphere product plus Newton
  refinement of the stationarity system (n <= 3),
* spectral_radius_nonneg: the Perron-style route for nonnegative tensors,
  whose M-spectral radius equals the greatest M-eigenvalue and carries a
  nonnegative eigenvector pair,
* is_irreducible: slice-wise irreducibility of nonnegative tensors.

Everything here is a pure function.  Restarts and grid seeds are
independent, and their results are combined by a deterministic reduction
(maximal eigenvalue, then lexicographic eigenvector order), so outputs are
reproducible for a fixed seed regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import tensor_core as tc
from .errors import DimensionTooLarge, NoConvergence, NotNonnegative

DEFAULT_PAIR_TOL = 1e-8
DEDUP_ALIGN_TOL = 1e-6


@dataclass(frozen=True)
class MEigenpair:
    """An eigenvalue with its unit eigenvector pair, signs canonicalized."""

    lam: float
    x: np.ndarray
    y: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    def residuals(self, A) -> tuple[float, float]:
        r1 = tc.contract_xyy(A, self.x, self.y) - self.lam * self.x
        r2 = tc.contract_xxy(A, self.x, self.y) - self.lam * self.y
        return float(np.linalg.norm(r1)), float(np.linalg.norm(r2))


@dataclass(frozen=True)
class MSpectrum:
    """Deduplicated eigenpairs sorted by descending eigenvalue.

    complete is set by the enumeration path; completeness of the grid
    search is heuristic and the diagnostics record the seeding statistics.
    """

    pairs: tuple
    complete: bool
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def eigenvalues(self, tol=1e-6) -> list[float]:
        """Distinct eigenvalues (descending), collapsing within tol."""
        out: list[float] = []
        for p in self.pairs:
            if not out or abs(p.lam - out[-1]) > tol * max(1.0, abs(out[-1])):
                out.append(p.lam)
        return out

    def min_eigenvalue(self) -> float:
        return self.pairs[-1].lam

    def max_eigenvalue(self) -> float:
        return self.pairs[0].lam


def canonical_unit(v, tol=1e-11) -> np.ndarray:
    """Normalize and flip sign so the first non-negligible component is positive."""
    v = np.asarray(v, dtype=np.float64)
    nrm = np.linalg.norm(v)
    if nrm > 0:
        v = v / nrm
    for c in v:
        if abs(c) > tol:
            if c < 0:
                v = -v
            break
    return v


def _finalize_pair(A, lam, x, y, pair_tol, diagnostics=None) -> MEigenpair:
    x = canonical_unit(x)
    y = canonical_unit(y)
    pair = MEigenpair(lam=float(lam), x=x, y=y, diagnostics=diagnostics or {})
    r1, r2 = pair.residuals(A)
    if max(r1, r2) > pair_tol:
        raise NoConvergence(
            f"eigenpair residual {max(r1, r2):.3e} exceeds tolerance {pair_tol:.1e}"
        )
    return pair


def _lex_key(pair_tuple):
    lam, x, y = pair_tuple
    return (-lam, tuple(np.round(x, 12)), tuple(np.round(y, 12)))


def unit_circle_grid(count) -> np.ndarray:
    """count unit vectors covering half the circle (signs are redundant)."""
    th = np.arange(count) * np.pi / count
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def fibonacci_sphere(count) -> np.ndarray:
    """Spherical Fibonacci point set on S^2."""
    i = np.arange(count, dtype=np.float64) + 0.5
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _default_grid(n) -> int:
    return 360 if n == 2 else 2000


def _sphere_grid(n, count) -> np.ndarray:
    if n == 2:
        return unit_circle_grid(count)
    return fibonacci_sphere(count)


def _coarse_argmax_seeds(entries, n, nonneg, top=3):
    """Best pairs of a coarse grid scan of the biquadratic form."""
    if n == 2:
        th = np.arange(72) * (np.pi / 2 if nonneg else np.pi) / 72
        X = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif n == 3:
        X = fibonacci_sphere(300)
        if nonneg:
            X = np.unique(np.abs(X), axis=0)
    else:
        rng = np.random.default_rng(0)
        X = rng.standard_normal((400, n))
        if nonneg:
            X = np.abs(X)
        X /= np.linalg.norm(X, axis=1, keepdims=True)
    _, lam = K.kkt_residual_grid(entries, X, X)
    flat = np.argsort(lam, axis=None, kind="stable")[::-1][:top]
    seeds = []
    for f in flat:
        p, q = np.unravel_index(int(f), lam.shape)
        seeds.append((X[p].copy(), X[q].copy()))
    return seeds


def _seed_bank(entries, n, restarts, seed, nonneg):
    seeds = [(np.ones(n), np.ones(n))]
    for i in range(n):
        for k in range(n):
            ei = np.zeros(n)
            ek = np.zeros(n)
            ei[i] = 1.0
            ek[k] = 1.0
            seeds.append((ei, ek))
    seeds.extend(_coarse_argmax_seeds(entries, n, nonneg))
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        x0 = rng.standard_normal(n)
        y0 = rng.standard_normal(n)
        if nonneg:
            x0, y0 = np.abs(x0), np.abs(y0)
        seeds.append((x0, y0))
    return seeds


def _run_power(entries, n, tau, max_iter, tol, restarts, seed, nonneg):
    """Best converged run of the shifted alternating power iteration."""
    shifted = np.ascontiguousarray(entries + tau * tc.identity_entries(n))
    best = None
    converged_runs = 0
    total_iters = 0
    for x0, y0 in _seed_bank(entries, n, restarts, seed, nonneg):
        lam, x, y, iters, ok, history = K.wqz_power(
            shifted, np.asarray(x0, float), np.asarray(y0, float),
            int(max_iter), float(tol),
        )
        total_iters += iters
        if not ok:
            continue
        converged_runs += 1
        cand = (float(lam), canonical_unit(x), canonical_unit(y), iters)
        if best is None or _lex_key(cand[:3]) < _lex_key(best[:3]):
            best = cand
    if best is None:
        raise NoConvergence(
            f"power iteration failed to converge within {max_iter} iterations "
            f"on all {restarts} restarts; raise max_iter or restarts"
        )
    diagnostics = {
        "backend": K.BACKEND,
        "shift": tau,
        "seeds": restarts,
        "converged_runs": converged_runs,
        "total_iterations": int(total_iters),
        "best_iterations": int(best[3]),
    }
    return best[0], best[1], best[2], diagnostics


def power_method_max(A, *, shift=None, max_iter=10000, tol=1e-10,
                     restarts=16, seed=42, pair_tol=DEFAULT_PAIR_TOL) -> MEigenpair:
    """Largest M-eigenvalue via the shifted alternating power method.

    The tensor is shifted by tau = 1 + sum|a_ijkl| (or the supplied shift)
    so the iterate values are positive and nondecreasing; the shift is
    removed from the reported eigenvalue, which leaves the eigenvectors
    unchanged.
    """
    tau = float(shift) if shift is not None else 1.0 + float(np.abs(A.entries).sum())
    lam_sh, x, y, diag = _run_power(
        A.entries, A.n, tau, max_iter, tol, restarts, seed, nonneg=False
    )
    return _finalize_pair(A, lam_sh - tau, x, y, pair_tol, diag)


def power_method_min(A, *, shift=None, max_iter=10000, tol=1e-10,
                     restarts=16, seed=42, pair_tol=DEFAULT_PAIR_TOL) -> MEigenpair:
    """Smallest M-eigenvalue, computed as the negated maximum of -A."""
    neg = np.ascontiguousarray(-A.entries)
    tau = float(shift) if shift is not None else 1.0 + float(np.abs(neg).sum())
    lam_sh, x, y, diag = _run_power(
        neg, A.n, tau, max_iter, tol, restarts, seed, nonneg=False
    )
    return _finalize_pair(A, -(lam_sh - tau), x, y, pair_tol, diag)


def spectral_radius_nonneg(B, *, shift=None, max_iter=10000, tol=1e-10,
                           restarts=16, seed=42,
                           pair_tol=DEFAULT_PAIR_TOL) -> MEigenpair:
    """M-spectral radius of a nonnegative tensor with nonnegative eigenvectors.

    For nonnegative tensors the spectral radius equals the greatest
    M-eigenvalue and is attained on the nonnegative orthant, so the
    iteration is started and kept there (nonnegative iterates map to
    nonnegative iterates).
    """
    entries = np.asarray(B.entries, dtype=np.float64)
    if entries.min() < -1e-14:
        idx = np.unravel_index(int(np.argmin(entries)), entries.shape)
        raise NotNonnegative(
            f"entry {tuple(int(i) + 1 for i in idx)} = {entries[idx]:.3e} is negative"
        )
    entries = np.ascontiguousarray(np.maximum(entries, 0.0))
    tau = float(shift) if shift is not None else 1.0 + float(entries.sum())
    lam_sh, x, y, diag = _run_power(
        entries, B.n, tau, max_iter, tol, restarts, seed, nonneg=True
    )
    rho = lam_sh - tau
    if abs(rho) <= 1e-12 * max(1.0, tau):
        rho = 0.0
    if rho < 1e-10 and entries.max() >= 1e-10:
        raise NoConvergence(
            "iteration reported a zero spectral radius for a nonzero tensor"
        )
    x = np.maximum(x, 0.0)
    y = np.maximum(y, 0.0)
    x /= np.linalg.norm(x)
    y /= np.linalg.norm(y)
    return _finalize_pair(B, rho, x, y, pair_tol, diag)


def _torus_local_minima(R):
    """Grid points not exceeded by any of their 8 torus neighbours."""
    mask = np.ones_like(R, dtype=bool)
    for dp in (-1, 0, 1):
        for dq in (-1, 0, 1):
            if dp == 0 and dq == 0:
                continue
            mask &= R <= np.roll(np.roll(R, dp, axis=0), dq, axis=1)
    return mask


def _spatially_separated(order, X, Y, flat_r, limit, align=0.995,
                         scan_cap=200000):
    """Greedy lowest-residual selection keeping seeds apart on both spheres."""
    kept = []
    kept_x = []
    kept_y = []
    my = Y.shape[0]
    for f in order[:scan_cap]:
        p, q = divmod(int(f), my)
        x, y = X[p], Y[q]
        close = False
        for xk, yk in zip(kept_x, kept_y):
            if abs(x @ xk) > align and abs(y @ yk) > align:
                close = True
                break
        if not close:
            kept.append((p, q))
            kept_x.append(x)
            kept_y.append(y)
            if len(kept) >= limit:
                break
    return kept


def enumerate_spectrum(A, *, grid_density=None, refine_tol=None,
                       dedup_tol=1e-6, newton_steps=60,
                       pair_tol=DEFAULT_PAIR_TOL, degenerate_threshold=6,
                       max_candidates=4000) -> MSpectrum:
    """All isolated M-eigenpairs found by dense seeding plus Newton refinement.

    n = 2 seeds every torus-local minimum of the stationarity residual on an
    angle grid; n = 3 uses spherical Fibonacci grids with greedy candidate
    selection.  Continuous families of eigenpairs (e.g. the identity tensor)
    collapse to a single representative flagged as a degenerate manifold.
    Completeness is heuristic; seeding statistics are reported in the
    diagnostics.

    Raises DimensionTooLarge for n > 3.
    """
    n = A.n
    if n > 3:
        raise DimensionTooLarge(
            f"spectrum enumeration supports n <= 3, got n = {n}"
        )
    entries = np.ascontiguousarray(A.entries)
    G = max(8, int(grid_density)) if grid_density else _default_grid(n)
    scale = max(1.0, A.max_abs_entry())
    ftol = float(refine_tol) if refine_tol is not None else 1e-12 * scale

    X = _sphere_grid(n, G)
    R, _ = K.kkt_residual_grid(entries, X, X)

    seeds_x = []
    seeds_y = []
    if n == 2:
        ps, qs = np.nonzero(_torus_local_minima(R))
        order = np.argsort(R[ps, qs], kind="stable")
        ps, qs = ps[order], qs[order]
        if len(ps) > max_candidates:
            pick = np.linspace(0, len(ps) - 1, max_candidates).astype(int)
            ps, qs = ps[pick], qs[pick]
        seeds_x.extend(X[p] for p in ps)
        seeds_y.extend(X[q] for q in qs)
    else:
        order = np.argsort(R, axis=None, kind="stable")
        kept = _spatially_separated(order, X, X, R, limit=1000)
        seeds_x.extend(X[p] for p, _ in kept)
        seeds_y.extend(X[q] for _, q in kept)
        # matrix-eigenvector seeds catch isolated pairs between grid points
        for p in range(0, G, 25):
            M = tc.partial_xx(A, X[p])
            _, V = np.linalg.eigh(M)
            for c in range(n):
                seeds_x.append(X[p])
                seeds_y.append(V[:, c])
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = 1.0
            ej[j] = 1.0
            seeds_x.append(ei)
            seeds_y.append(ej)
    seeds_x.append(np.ones(n) / np.sqrt(n))
    seeds_y.append(np.ones(n) / np.sqrt(n))

    X0 = np.ascontiguousarray(np.array(seeds_x))
    Y0 = np.ascontiguousarray(np.array(seeds_y))
    Xr, Yr, LAM, MU, RES, CONV = K.newton_refine_batch(
        entries, X0, Y0, int(newton_steps), ftol
    )

    accepted = []
    failures = 0
    for p in range(len(X0)):
        if not CONV[p]:
            failures += 1
            continue
        lam, mu = float(LAM[p]), float(MU[p])
        if abs(lam - mu) > 1e-8 * max(1.0, abs(lam)):
            failures += 1
            continue
        x = canonical_unit(Xr[p])
        y = canonical_unit(Yr[p])
        accepted.append((0.5 * (lam + mu), x, y))
    accepted.sort(key=_lex_key)

    clusters: list[dict] = []
    for lam, x, y in accepted:
        placed = False
        for cl in clusters:
            if abs(lam - cl["lam"]) <= dedup_tol * max(1.0, abs(cl["lam"])):
                for (_, x2, y2) in cl["reps"]:
                    if abs(x @ x2) > 1 - DEDUP_ALIGN_TOL and abs(y @ y2) > 1 - DEDUP_ALIGN_TOL:
                        cl["hits"] += 1
                        placed = True
                        break
                if not placed:
                    cl["reps"].append((lam, x, y))
                    cl["hits"] += 1
                    placed = True
                break
        if not placed:
            clusters.append({"lam": lam, "reps": [(lam, x, y)], "hits": 1})

    if not clusters:
        raise NoConvergence(
            "no seed of the stationarity system could be refined to an "
            "eigenpair; raise grid_density or newton_steps"
        )

    pairs = []
    degenerate_levels = []
    for cl in clusters:
        if len(cl["reps"]) > degenerate_threshold:
            lam, x, y = cl["reps"][0]
            degenerate_levels.append(lam)
            pairs.append(_finalize_pair(
                A, lam, x, y, pair_tol,
                {"degenerate_manifold": True,
                 "distinct_directions": len(cl["reps"]),
                 "cluster_hits": cl["hits"]},
            ))
        else:
            for lam, x, y in cl["reps"]:
                pairs.append(_finalize_pair(
                    A, lam, x, y, pair_tol, {"cluster_hits": cl["hits"]}
                ))
    pairs.sort(key=lambda p: _lex_key((p.lam, p.x, p.y)))

    diagnostics = {
        "backend": K.BACKEND,
        "grid_density": G,
        "seeds": int(len(X0)),
        "converged_seeds": int(len(accepted)),
        "failed_seeds": int(failures),
        "degenerate_levels": degenerate_levels,
    }
    return MSpectrum(pairs=tuple(pairs), complete=True, diagnostics=diagnostics)


def _strongly_connected(pattern) -> bool:
    n = pattern.shape[0]
    for adj in (pattern, pattern.T):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in range(n):
                if v != u and adj[u, v] and not seen[v]:
                    seen[v] = True
                    stack.append(v)
        if not seen.all():
            return False
    return True


def is_irreducible(B) -> tuple[bool, str | None]:
    """Slice-wise irreducibility of a nonnegative tensor.

    True iff every slice matrix B(:,:,k,k) and B(i,i,:,:) has a strongly
    connected nonzero pattern.  On failure the witness names the first
    reducible slice (1-based).
    """
    entries = np.asarray(B.entries, dtype=np.float64)
    if entries.min() < -1e-14:
        raise NotNonnegative("irreducibility is defined for nonnegative tensors")
    n = B.n
    for k in range(n):
        if not _strongly_connected(entries[:, :, k, k] > 0):
            return False, f"x-slice (k={k + 1}) is reducible"
    for i in range(n):
        if not _strongly_connected(entries[i, i, :, :] > 0):
            return False, f"y-slice (i={i + 1}) is reducible"
    return True, None
