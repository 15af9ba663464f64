"""Classification ladder and equivalent-condition battery.

The entries a_iikk are called diagonal (they sit on the diagonal of the
unfolding); all others are off-diagonal.  A tensor whose off-diagonal
entries are all nonpositive has a Z-pattern and can be written as
s*E - B with B nonnegative.  It is an M-structured tensor when
s >= rho_M(B) and nonsingular when strict, which happens exactly when

    alpha > rho_M(alpha*E - A),   alpha = max a_iikk.

Nonsingular M-structured tensors are exactly the M-positive definite
Z-pattern tensors, so the ladder decides strong ellipticity for this
class.  The battery of conditions C1..C13 cross-checks the decision:

    C1  the ladder verdict itself
    C2  minimal M-eigenvalue positive (full sphere product)
    C3  minimum of the form over the nonnegative orthant positive
    C4  every enumerated M-eigenvalue positive (n <= 3)
    C5  alpha > rho_M(alpha*E - A)
    C6  A x^2 is a nonsingular M-matrix for each x >= 0
    C7  for each x >= 0 some y > 0 gives (A x^2) y > 0
    C8  as C7 with y >= 0
    C9  for each x >= 0 some positive diagonal D makes D (A x^2) D
        strictly diagonally dominant
    C10-C13  the mirror conditions on A y^2

C1-C5 are decisive computations; C6-C13 quantify over all nonnegative x
(or y) and are implemented as falsifiers over a seeded sample: any failing
sample is a decisive counterexample, while all-pass means "pass (sampled)"
and is not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import m_eigen, tensor_core as tc
from .errors import Asymmetric, ConditionInapplicable, DimensionTooLarge

NOT_Z = "NOT_Z"
NONSINGULAR_M = "NONSINGULAR_M"
SINGULAR_M_BOUNDARY = "SINGULAR_M_BOUNDARY"
NOT_M = "NOT_M"

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

ALL_CONDITIONS = tuple(f"C{i}" for i in range(1, 14))
SAMPLED_CONDITIONS = ("C6", "C7", "C8", "C9", "C10", "C11", "C12", "C13")


@dataclass(frozen=True)
class ZPattern:
    is_z: bool
    violations: tuple

    def to_dict(self) -> dict:
        return {
            "is_z": bool(self.is_z),
            "violations": [
                {"index": list(idx), "value": float(v)} for idx, v in self.violations
            ],
        }


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    status: str
    decisive: bool
    witness: dict | None = None
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "status": self.status,
            "decisive": bool(self.decisive),
            "witness": self.witness,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class ClassificationReport:
    z_pattern: ZPattern
    alpha: float
    rho_shift: float | None
    verdict: str
    margin: float | None
    margin_tol: float
    min_eigenvalue: float | None
    condition_results: dict
    consistency_ok: bool
    consistency_notes: tuple
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "z_pattern": self.z_pattern.to_dict(),
            "alpha": float(self.alpha),
            "rho_shift": None if self.rho_shift is None else float(self.rho_shift),
            "verdict": self.verdict,
            "margin": None if self.margin is None else float(self.margin),
            "margin_tol": float(self.margin_tol),
            "min_eigenvalue": (
                None if self.min_eigenvalue is None else float(self.min_eigenvalue)
            ),
            "conditions": {
                cid: res.to_dict() for cid, res in sorted(self.condition_results.items())
            },
            "consistency_ok": bool(self.consistency_ok),
            "consistency_notes": list(self.consistency_notes),
            "diagnostics": self.diagnostics,
        }


def z_pattern(A, z_tol=0.0) -> ZPattern:
    """Split entries by the a_iikk rule and list positive off-diagonal entries."""
    n = A.n
    entries = A.entries
    violations = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    if i == j and k == l:
                        continue
                    v = entries[i, j, k, l]
                    if v > z_tol:
                        violations.append(((i + 1, j + 1, k + 1, l + 1), float(v)))
    return ZPattern(is_z=not violations, violations=tuple(violations))


def is_nonsingular_m_matrix(M, *, sym_tol=1e-10, z_tol=0.0):
    """Symmetric Z-matrix test: off-diagonal entries <= z_tol and minimum
    eigenvalue positive.  Returns (bool, witness dict).

    For symmetric matrices positive definiteness plus the Z sign pattern is
    equivalent to being a nonsingular M-matrix.
    """
    M = np.asarray(M, dtype=np.float64)
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > sym_tol * scale:
        raise Asymmetric("matrix is not symmetric within tolerance")
    M = 0.5 * (M + M.T)
    n = M.shape[0]
    off = M - np.diag(np.diag(M))
    worst = float(off.max())
    if worst > z_tol:
        idx = np.unravel_index(int(np.argmax(off)), off.shape)
        return False, {
            "reason": "positive off-diagonal entry",
            "index": [int(idx[0]) + 1, int(idx[1]) + 1],
            "value": worst,
        }
    wmin = float(np.linalg.eigvalsh(M).min())
    if wmin <= 0.0:
        return False, {"reason": "nonpositive eigenvalue", "min_eigenvalue": wmin}
    return True, {"min_eigenvalue": wmin}


def _margin_tol(alpha) -> float:
    return 1e-8 * max(1.0, abs(alpha))


class _Workspace:
    """Lazy cache of the expensive per-tensor computations.

    The battery conditions share the Z-pattern scan, the complement
    spectral radius, the minimal-eigenvalue power run and the spectrum
    enumeration instead of recomputing them per condition.
    """

    def __init__(self, A, z_tol, power_opts, enum_opts):
        self.A = A
        self.z_tol = z_tol
        self.power_opts = dict(power_opts or {})
        self.enum_opts = dict(enum_opts or {})
        self._cache = {}

    def z_pattern(self):
        if "zp" not in self._cache:
            self._cache["zp"] = z_pattern(self.A, z_tol=self.z_tol)
        return self._cache["zp"]

    def alpha(self):
        return float(self.A.diagonal_entries().max())

    def rho_pair(self):
        if "rho" not in self._cache:
            shifted = tc.ElasticityTensor(
                n=self.A.n,
                entries=np.ascontiguousarray(
                    np.maximum(
                        self.alpha() * tc.identity_entries(self.A.n)
                        - self.A.entries,
                        0.0,
                    )
                ),
            )
            self._cache["rho"] = m_eigen.spectral_radius_nonneg(
                shifted, **self.power_opts
            )
        return self._cache["rho"]

    def min_pair(self):
        if "min" not in self._cache:
            self._cache["min"] = m_eigen.power_method_min(
                self.A, **self.power_opts
            )
        return self._cache["min"]

    def spectrum(self):
        if "spectrum" not in self._cache:
            self._cache["spectrum"] = m_eigen.enumerate_spectrum(
                self.A, **self.enum_opts
            )
        return self._cache["spectrum"]


def classify(A, *, z_tol=0.0, margin_tol=None, compute_min_eig=True,
             power_opts=None, _ws=None) -> ClassificationReport:
    """Ladder decision: Z-pattern, then alpha versus rho_M(alpha*E - A).

    Verdicts: NOT_Z when the sign pattern fails; otherwise NONSINGULAR_M,
    SINGULAR_M_BOUNDARY or NOT_M by comparing alpha with the spectral
    radius of the nonnegative complement within margin_tol.  The minimal
    M-eigenvalue is also estimated by the power method as an independent
    corroboration (for Z-pattern tensors the two routes agree in theory).
    """
    ws = _ws or _Workspace(A, z_tol, power_opts, None)
    zp = ws.z_pattern()
    alpha = ws.alpha()
    mtol = _margin_tol(alpha) if margin_tol is None else float(margin_tol)
    diagnostics = {}

    min_eig = None
    if compute_min_eig:
        min_pair = ws.min_pair()
        min_eig = float(min_pair.lam)
        diagnostics["min_eig_iterations"] = min_pair.diagnostics.get(
            "total_iterations"
        )

    if not zp.is_z:
        return ClassificationReport(
            z_pattern=zp, alpha=alpha, rho_shift=None, verdict=NOT_Z,
            margin=None, margin_tol=mtol, min_eigenvalue=min_eig,
            condition_results={}, consistency_ok=True, consistency_notes=(),
            diagnostics=diagnostics,
        )

    rho_pair = ws.rho_pair()
    rho = float(rho_pair.lam)
    margin = alpha - rho
    if margin > mtol:
        verdict = NONSINGULAR_M
    elif margin < -mtol:
        verdict = NOT_M
    else:
        verdict = SINGULAR_M_BOUNDARY
    diagnostics["rho_iterations"] = rho_pair.diagnostics.get("total_iterations")

    return ClassificationReport(
        z_pattern=zp, alpha=alpha, rho_shift=rho, verdict=verdict,
        margin=margin, margin_tol=mtol, min_eigenvalue=min_eig,
        condition_results={}, consistency_ok=True, consistency_notes=(),
        diagnostics=diagnostics,
    )


def _sample_nonneg_units(n, n_samples, seed):
    rng = np.random.default_rng(seed)
    X = np.abs(rng.standard_normal((n_samples, n)))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    corners = np.vstack([np.eye(n), np.ones((1, n)) / np.sqrt(n)])
    return np.vstack([corners, X])


def _batch_partial(A, X, side):
    if side == "x":
        return np.einsum("ijkl,pi,pj->pkl", A.entries, X, X, optimize=True)
    return np.einsum("ijkl,pk,pl->pij", A.entries, X, X, optimize=True)


def _z_matrix_mask(Ms, z_slack):
    off = Ms.copy()
    idx = np.arange(Ms.shape[1])
    off[:, idx, idx] = -np.inf
    return off.reshape(Ms.shape[0], -1).max(axis=1) <= z_slack


def _sampled_matrix_condition(A, cond, side, n_samples, seed, z_tol):
    """Falsifier for the sampled conditions on A x^2 (side 'x') or A y^2."""
    n = A.n
    X = _sample_nonneg_units(n, n_samples, seed)
    Ms = _batch_partial(A, X, side)
    scale = max(1.0, A.max_abs_entry())
    z_slack = z_tol + 1e-12 * scale
    kind = {"C6": "m_matrix", "C7": "semi_positive_strict",
            "C8": "semi_positive", "C9": "scaled_dominance"}[cond]

    if kind == "m_matrix":
        z_ok = _z_matrix_mask(Ms, z_slack)
        wmin = np.linalg.eigvalsh(Ms).min(axis=1)
        ok = z_ok & (wmin > 0.0)
        if ok.all():
            return None
        bad = int(np.argmin(ok))
        return {
            "sample": X[bad].tolist(),
            "matrix": Ms[bad].tolist(),
            "min_eigenvalue": float(wmin[bad]),
            "z_pattern_ok": bool(z_ok[bad]),
        }

    # solve (A x^2) y = ones; for a symmetric Z-matrix a strictly positive
    # solution is equivalent to the nonsingular M-matrix property
    e = np.ones(n)
    det = np.linalg.det(Ms)
    singular = ~np.isfinite(det) | (np.abs(det) < 1e-300)
    Ms_safe = Ms.copy()
    Ms_safe[singular] = np.eye(n)
    rhs = np.broadcast_to(e[:, None], (Ms.shape[0], n, 1)).copy()
    Ys = np.linalg.solve(Ms_safe, rhs)[..., 0]
    if kind == "semi_positive_strict":
        ok = ~singular & (Ys.min(axis=1) > 0.0)
    elif kind == "semi_positive":
        ok = ~singular & (Ys.min(axis=1) >= -1e-12)
    else:  # scaled_dominance with D = diag(y)
        pos = ~singular & (Ys.min(axis=1) > 0.0)
        D = np.where(pos[:, None], Ys, 1.0)
        scaled = D[:, :, None] * Ms * D[:, None, :]
        diag = np.abs(np.diagonal(scaled, axis1=1, axis2=2))
        offsum = np.abs(scaled).sum(axis=2) - diag
        ok = pos & ((diag - offsum).min(axis=1) > 0.0)
    if ok.all():
        return None
    bad = int(np.argmin(ok))
    return {
        "sample": X[bad].tolist(),
        "matrix": Ms[bad].tolist(),
        "solution": None if singular[bad] else Ys[bad].tolist(),
        "singular": bool(singular[bad]),
    }


def check_condition(A, condition, *, n_samples=1000, seed=42, z_tol=0.0,
                    margin_tol=None, power_opts=None, enum_opts=None,
                    _ws=None) -> ConditionResult:
    """Evaluate one battery condition.

    Raises ConditionInapplicable for the Z-specific conditions on tensors
    without a Z-pattern (C2 and C4 remain meaningful for any tensor).
    """
    condition = condition.upper()
    if condition not in ALL_CONDITIONS:
        raise ValueError(f"unknown condition id {condition!r}")
    ws = _ws or _Workspace(A, z_tol, power_opts, enum_opts)
    zp = ws.z_pattern()
    if condition not in ("C2", "C4") and not zp.is_z:
        raise ConditionInapplicable(
            f"{condition} applies to Z-pattern tensors only; "
            "positive off-diagonal entries present"
        )
    scale = max(1.0, A.max_abs_entry())
    band = 1e-8 * scale

    if condition == "C1" or condition == "C5":
        report = classify(
            A, z_tol=z_tol, margin_tol=margin_tol, compute_min_eig=False,
            _ws=ws,
        )
        status = {
            NONSINGULAR_M: PASS,
            NOT_M: FAIL,
            SINGULAR_M_BOUNDARY: SKIPPED,
        }[report.verdict]
        witness = None
        if status is not PASS:
            witness = {"alpha": report.alpha, "rho_shift": report.rho_shift}
        return ConditionResult(
            condition=condition, status=status, decisive=True, witness=witness,
            diagnostics={"alpha": report.alpha, "rho_shift": report.rho_shift,
                         "margin": report.margin},
        )

    if condition == "C2":
        pair = ws.min_pair()
        if pair.lam > band:
            return ConditionResult(condition, PASS, True, None,
                                   {"min_eigenvalue": float(pair.lam)})
        if pair.lam < -band:
            return ConditionResult(
                condition, FAIL, True,
                {"min_eigenvalue": float(pair.lam),
                 "x": pair.x.tolist(), "y": pair.y.tolist()},
                {"min_eigenvalue": float(pair.lam)},
            )
        return ConditionResult(condition, SKIPPED, True,
                               {"min_eigenvalue": float(pair.lam)},
                               {"note": "boundary within tolerance"})

    if condition == "C3":
        # minimum over the nonnegative orthant equals
        # alpha - rho_M(alpha*E - A) by the orthant-restricted variational
        # form of the spectral radius
        alpha = ws.alpha()
        rho_pair = ws.rho_pair()
        value = alpha - float(rho_pair.lam)
        diag = {"orthant_minimum": value, "argmin_x": rho_pair.x.tolist(),
                "argmin_y": rho_pair.y.tolist()}
        if value > band:
            return ConditionResult(condition, PASS, True, None, diag)
        if value < -band:
            return ConditionResult(
                condition, FAIL, True,
                {"orthant_minimum": value, "x": rho_pair.x.tolist(),
                 "y": rho_pair.y.tolist()},
                diag,
            )
        return ConditionResult(condition, SKIPPED, True, None,
                               {"note": "boundary within tolerance", **diag})

    if condition == "C4":
        if A.n > 3:
            return ConditionResult(
                condition, SKIPPED, False, None,
                {"note": "spectrum enumeration unavailable for n > 3"},
            )
        spectrum = ws.spectrum()
        lam_min = spectrum.min_eigenvalue()
        diag = {"eigenvalues": [float(p.lam) for p in spectrum.pairs]}
        if lam_min > band:
            return ConditionResult(condition, PASS, True, None, diag)
        if lam_min < -band:
            worst = spectrum.pairs[-1]
            return ConditionResult(
                condition, FAIL, True,
                {"min_eigenvalue": float(lam_min),
                 "x": worst.x.tolist(), "y": worst.y.tolist()},
                diag,
            )
        return ConditionResult(condition, SKIPPED, True, None,
                               {"note": "boundary within tolerance", **diag})

    side = "x" if condition in ("C6", "C7", "C8", "C9") else "y"
    base = {"C10": "C6", "C11": "C7", "C12": "C8", "C13": "C9"}.get(
        condition, condition
    )
    witness = _sampled_matrix_condition(A, base, side, n_samples, seed, z_tol)
    if witness is None:
        return ConditionResult(
            condition, PASS, False, None,
            {"samples": int(n_samples) + A.n + 1, "note": "pass (sampled)"},
        )
    return ConditionResult(
        condition, FAIL, True, witness, {"samples": int(n_samples) + A.n + 1}
    )


def _consistency(results) -> tuple[bool, tuple]:
    decided = {
        cid: res.status
        for cid, res in results.items()
        if cid in ("C1", "C2", "C3", "C4", "C5") and res.status != SKIPPED
    }
    notes = []
    statuses = set(decided.values())
    if len(statuses) > 1:
        notes.append(
            "decisive conditions disagree: "
            + ", ".join(f"{cid}={st}" for cid, st in sorted(decided.items()))
        )
    return (not notes), tuple(notes)


def run_condition_battery(A, *, conditions=ALL_CONDITIONS, n_samples=1000,
                          seed=42, z_tol=0.0, margin_tol=None,
                          power_opts=None, enum_opts=None, _ws=None):
    """Evaluate a set of conditions; inapplicable ones are reported skipped.

    Returns (results dict, consistency_ok, notes).
    """
    ws = _ws or _Workspace(A, z_tol, power_opts, enum_opts)
    results = {}
    for cid in conditions:
        try:
            results[cid] = check_condition(
                A, cid, n_samples=n_samples, seed=seed, z_tol=z_tol,
                margin_tol=margin_tol, _ws=ws,
            )
        except ConditionInapplicable as exc:
            results[cid] = ConditionResult(
                condition=cid, status=SKIPPED, decisive=False, witness=None,
                diagnostics={"note": str(exc)},
            )
        except DimensionTooLarge as exc:
            results[cid] = ConditionResult(
                condition=cid, status=SKIPPED, decisive=False, witness=None,
                diagnostics={"note": str(exc)},
            )
    ok, notes = _consistency(results)
    return results, ok, notes


def classify_with_battery(A, *, n_samples=1000, seed=42, z_tol=0.0,
                          margin_tol=None, power_opts=None,
                          enum_opts=None) -> ClassificationReport:
    """Full report: ladder verdict plus the C1..C13 battery."""
    ws = _Workspace(A, z_tol, power_opts, enum_opts)
    report = classify(
        A, z_tol=z_tol, margin_tol=margin_tol, compute_min_eig=True, _ws=ws,
    )
    results, ok, notes = run_condition_battery(
        A, n_samples=n_samples, seed=seed, z_tol=z_tol, margin_tol=margin_tol,
        _ws=ws,
    )
    return ClassificationReport(
        z_pattern=report.z_pattern, alpha=report.alpha,
        rho_shift=report.rho_shift, verdict=report.verdict,
        margin=report.margin, margin_tol=report.margin_tol,
        min_eigenvalue=report.min_eigenvalue, condition_results=results,
        consistency_ok=ok, consistency_notes=notes,
        diagnostics=report.diagnostics,
    )
