"""Sufficient-condition certification by alternating projections.

A tensor is M-positive semidefinite whenever some weakly symmetric tensor
with a positive semidefinite unfolding matches its pairwise entry sums
(t_ijkl + t_jikl = 2 a_ijkl): the two tensors share the biquadratic form,
and the PSD unfolding makes the form a sum of squares.  The search for such
a tensor alternates orthogonal projections between

* the affine class T_A of weakly symmetric tensors with the entry-sum
  constraint, and
* the cone S of weakly symmetric tensors whose unfolding is PSD.

A converged run certifies M-positive semidefiniteness and yields a rank-one
decomposition certificate; running on A - eps*E with eps > 0 upgrades the
certificate to strict M-positive definiteness (strong ellipticity).  The
condition is sufficient only: a stalled run proves nothing, so callers pair
it with the eigenvalue route for disproofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import tensor_core as tc
from .errors import AsymmetricUnfolding, DimensionMismatch, NotPsd

CERTIFIED_M_PSD = "CERTIFIED_M_PSD"
CERTIFIED_M_PD = "CERTIFIED_M_PD"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_MAX_ITER = 50000
DEFAULT_STALL_WINDOW = 200
DEFAULT_STALL_EPS = 1e-12
CERTIFICATE_TOL = 1e-8


@dataclass(frozen=True)
class PocsState:
    """Terminal state of one alternating-projection run."""

    A_t: tc.GeneralTensor4
    B_t: tc.GeneralTensor4
    t: int
    residual: float
    history: np.ndarray

    def __post_init__(self):
        self.history.setflags(write=False)


@dataclass(frozen=True)
class PsdCertificate:
    """Rank-one decomposition {(alpha_s, U_s)} proving M-positive
    semidefiniteness, plus the strictness shift epsilon.

    Reconstruction: a_ijkl = 1/2 sum_s alpha_s (u_ik u_jl + u_jk u_il)
    + eps * e_ijkl must reproduce the certified tensor.
    """

    terms: tuple
    epsilon: float

    def rank(self) -> int:
        return len(self.terms)

    def reconstruct(self, n) -> np.ndarray:
        out = tc.identity_entries(n) * self.epsilon
        for alpha, U in self.terms:
            out += 0.5 * alpha * (
                np.einsum("ik,jl->ijkl", U, U) + np.einsum("jk,il->ijkl", U, U)
            )
        return out

    def reconstruction_error(self, A) -> float:
        return float(np.abs(self.reconstruct(A.n) - A.entries).max())

    def to_dict(self, reconstruction_error=None) -> dict:
        doc = {
            "epsilon": float(self.epsilon),
            "terms": [
                {"alpha": float(alpha), "U": U.tolist()} for alpha, U in self.terms
            ],
        }
        if reconstruction_error is not None:
            doc["reconstruction_error"] = float(reconstruction_error)
        return doc


@dataclass(frozen=True)
class PocsOutcome:
    """Result of a certification attempt.

    INCONCLUSIVE never disproves strong ellipticity; it only means the
    sufficient condition was not established numerically.
    """

    status: str
    certificate: PsdCertificate | None
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)
    state: PocsState | None = None


def _entries_of(T):
    return np.asarray(T.entries, dtype=np.float64)


def project_affine(T, A) -> tc.GeneralTensor4:
    """Orthogonal projection of T onto the affine class of A.

    The class fixes t_ijkl = t_jilk and t_ijkl + t_jikl = 2 a_ijkl: entries
    with i = j or k = l are pinned to a_ijkl, and each remaining pair keeps
    only its skew part on top of a_ijkl.  Exact and idempotent.
    """
    if T.n != A.n:
        raise DimensionMismatch(f"tensor dimensions differ: {T.n} vs {A.n}")
    t = _entries_of(T)
    tw = 0.5 * (t + t.transpose(1, 0, 3, 2))
    out = A.entries + 0.5 * (tw - tw.transpose(1, 0, 2, 3))
    return tc.GeneralTensor4(n=A.n, entries=np.ascontiguousarray(out))


def project_psd(T) -> tc.GeneralTensor4:
    """Projection onto the cone of tensors with PSD unfolding.

    Eigendecomposes the (symmetric) unfolding and clips negative
    eigenvalues at zero.
    """
    t = _entries_of(T)
    n = T.n
    M = tc.unfold_x_entries(t)
    dev = float(np.abs(M - M.T).max())
    scale = max(1.0, float(np.abs(M).max()))
    if dev > 1e-10 * scale:
        raise AsymmetricUnfolding(
            f"unfolding deviates from symmetry by {dev:.3e}; the input must "
            "be weakly symmetric"
        )
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    w = np.maximum(w, 0.0)
    out = tc.fold_x_entries((V * w) @ V.T, n)
    return tc.GeneralTensor4(n=n, entries=np.ascontiguousarray(out))


def extract_certificate(Astar, epsilon=0.0, rank_tol=None) -> PsdCertificate:
    """Rank-one terms of a tensor with PSD unfolding.

    Each eigenvector of the unfolding with eigenvalue above rank_tol
    (default 1e-9 times the largest eigenvalue) is reshaped column-major
    into an n-by-n factor U_s.
    """
    t = _entries_of(Astar)
    n = Astar.n
    M = tc.unfold_x_entries(t)
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    if w.min() < -1e-10 * max(1.0, float(np.abs(w).max())):
        raise NotPsd(
            f"unfolding has eigenvalue {w.min():.3e}; cannot extract a "
            "positive semidefinite certificate"
        )
    cutoff = (1e-9 if rank_tol is None else rank_tol) * max(0.0, float(w.max()))
    terms = []
    for s in range(len(w) - 1, -1, -1):  # largest first
        if w[s] > max(cutoff, 0.0):
            U = np.ascontiguousarray(V[:, s].reshape(n, n, order="F"))
            terms.append((float(w[s]), U))
    return PsdCertificate(terms=tuple(terms), epsilon=float(epsilon))


def default_epsilon(A) -> float:
    """Input-scale-relative strictness shift: 1e-6 times the largest diagonal."""
    diag = A.diagonal_entries()
    return 1e-6 * max(0.0, float(diag.max()))


def pocs_verify(A, *, epsilon=0.0, max_iter=DEFAULT_MAX_ITER,
                residual_tol=None, stall_window=DEFAULT_STALL_WINDOW,
                stall_eps=DEFAULT_STALL_EPS,
                certificate_tol=CERTIFICATE_TOL) -> PocsOutcome:
    """Attempt an M-PSD (epsilon = 0) or M-PD (epsilon > 0) certificate.

    Runs the alternating projection on A - eps*E starting from that tensor.
    On convergence the certificate is extracted from the PSD iterate and
    validated against A; stalls and exhausted budgets return INCONCLUSIVE,
    which is not a disproof.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    n = A.n
    anchor = np.ascontiguousarray(
        A.entries - float(epsilon) * tc.identity_entries(n)
    )
    res_tol = (
        float(residual_tol)
        if residual_tol is not None
        else 1e-10 * max(1.0, float(np.linalg.norm(anchor)))
    )
    a_fin, b_fin, residuals, iters, status_code = K.pocs_run(
        anchor, int(max_iter), res_tol, int(stall_window), float(stall_eps)
    )
    a_t = tc.GeneralTensor4(n=n, entries=np.ascontiguousarray(a_fin))
    b_t = tc.GeneralTensor4(n=n, entries=np.ascontiguousarray(b_fin))
    final_res = float(residuals[-1]) if len(residuals) else 0.0
    state = PocsState(
        A_t=a_t, B_t=b_t, t=int(iters), residual=final_res,
        history=np.asarray(residuals),
    )
    min_unfold_eig = float(
        np.linalg.eigvalsh(tc.unfold_x_entries(b_fin)).min()
    )
    diagnostics = {
        "backend": K.BACKEND,
        "epsilon": float(epsilon),
        "iterations": int(iters),
        "final_residual": final_res,
        "residual_tol": res_tol,
        "min_unfolding_eigenvalue": min_unfold_eig,
        "stalled": status_code == 1,
    }

    if status_code != 0:
        diagnostics["note"] = (
            "sufficient condition not established; this does not disprove "
            "strong ellipticity"
        )
        return PocsOutcome(
            status=INCONCLUSIVE, certificate=None,
            diagnostics=diagnostics, state=state,
        )

    certificate = extract_certificate(b_t, epsilon=float(epsilon))
    err = certificate.reconstruction_error(A)
    diagnostics["reconstruction_error"] = err
    if err > certificate_tol:
        diagnostics["note"] = (
            f"converged point failed certificate validation "
            f"({err:.3e} > {certificate_tol:.1e})"
        )
        return PocsOutcome(
            status=INCONCLUSIVE, certificate=None,
            diagnostics=diagnostics, state=state,
        )
    status = CERTIFIED_M_PD if epsilon > 0 else CERTIFIED_M_PSD
    return PocsOutcome(
        status=status, certificate=certificate,
        diagnostics=diagnostics, state=state,
    )
