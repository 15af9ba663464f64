"""Data model and basic algebra for fourth-order tensors with elasticity symmetries.

An elasticity-symmetric tensor A = (a_ijkl) satisfies

    a_ijkl = a_jikl = a_ijlk

for all indices.  The biquadratic form A x^2 y^2 = sum a_ijkl x_i x_j y_k y_l
is the central object: strong ellipticity means the form is positive for all
nonzero x, y.  This module provides construction/validation, the partial
contractions used by every solver, the two block unfoldings into n^2-by-n^2
matrices, the identity tensor E (e_iikk = 1), entrywise shifts a*(A + b*E),
and the JSON file format.

Indices are 1-based in the file format and in error messages, 0-based in
arrays.  All values are immutable after construction and every operation is a
pure function of its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    NonFiniteEntry,
    ParseError,
    SymmetryViolation,
)

SYMMETRY_RTOL = 1e-12
WEAK_SYMMETRY_RTOL = 1e-12


def _as_entries(n, raw):
    arr = np.asarray(raw, dtype=np.float64)
    if arr.shape != (n, n, n, n):
        raise DimensionMismatch(
            f"expected entries of shape {(n, n, n, n)}, got {arr.shape}"
        )
    return arr


def orbit_average(entries):
    """Average each entry over its symmetry orbit {ijkl, jikl, ijlk, jilk}.

    This is the orthogonal (Frobenius) projection onto the elasticity
    symmetry class.  The two pairwise averaging passes keep the result
    bitwise symmetric (float addition is commutative), so downstream
    contractions are exactly symmetric matrices.
    """
    a = np.asarray(entries, dtype=np.float64)
    a = 0.5 * (a + a.transpose(1, 0, 2, 3))
    return 0.5 * (a + a.transpose(0, 1, 3, 2))


def _worst_symmetry_violation(a):
    """Return (deviation, 1-based quadruple) of the worst orbit spread."""
    dev = np.abs(a - orbit_average(a))
    flat = int(np.argmax(dev))
    idx = np.unravel_index(flat, a.shape)
    return float(dev[idx]), tuple(int(i) + 1 for i in idx)


@dataclass(frozen=True)
class ElasticityTensor:
    """Dense fourth-order tensor with the full elasticity symmetries.

    Attributes:
        n: dimension (n >= 2; the physical case is n = 3).
        entries: (n, n, n, n) float64 array, write-protected.
    """

    n: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def max_abs_entry(self) -> float:
        return float(np.abs(self.entries).max()) if self.entries.size else 0.0

    def diagonal_entries(self) -> np.ndarray:
        """The entries a_iikk as an (n, n) array over (i, k)."""
        n = self.n
        return self.entries[np.arange(n)[:, None], np.arange(n)[:, None],
                            np.arange(n)[None, :], np.arange(n)[None, :]]


@dataclass(frozen=True)
class GeneralTensor4:
    """Fourth-order tensor with only the weak symmetry b_ijkl = b_jilk.

    This is the class the feasibility iteration moves through: weakly
    symmetric tensors have symmetric unfoldings but need not satisfy the
    full elasticity symmetry.
    """

    n: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class UnfoldedMatrix:
    """An n^2-by-n^2 unfolding of a fourth-order tensor.

    mode "x": block (k, l) holds the slice A(:, :, k, l), so entry
    ((k, i), (l, j)) equals a_ijkl and the quadratic form with kron(y, x)
    reproduces the biquadratic form.  mode "y": block (i, j) holds
    A(i, j, :, :), paired with kron(x, y).
    """

    matrix: np.ndarray
    mode: str

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return int(round(self.matrix.shape[0] ** 0.5))


def new_elasticity_tensor(n, raw_entries, symmetrize=False) -> ElasticityTensor:
    """Build an ElasticityTensor after validating (or enforcing) its symmetries.

    With symmetrize off, inputs whose orbit spread exceeds SYMMETRY_RTOL
    relative to the largest entry magnitude are rejected; with symmetrize on,
    each entry is replaced by its orbit average.

    Raises:
        DimensionTooSmall: n < 2.
        NonFiniteEntry: NaN or infinity present.
        SymmetryViolation: symmetrize off and the symmetries fail.
    """
    if int(n) < 2:
        raise DimensionTooSmall(f"dimension must be at least 2, got {n}")
    n = int(n)
    a = _as_entries(n, raw_entries)
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise NonFiniteEntry(
            "non-finite entry at index " + str(tuple(int(i) + 1 for i in bad))
        )
    if symmetrize:
        a = orbit_average(a)
    else:
        dev, quad = _worst_symmetry_violation(a)
        scale = float(np.abs(a).max())
        if dev > SYMMETRY_RTOL * max(scale, 1e-300):
            raise SymmetryViolation(
                f"entries violate a_ijkl = a_jikl = a_ijlk at {quad} "
                f"(deviation {dev:.3e}, scale {scale:.3e})",
                quadruple=quad,
                deviation=dev,
            )
        a = orbit_average(a)  # scrub roundoff-level asymmetry
    return ElasticityTensor(n=n, entries=np.ascontiguousarray(a))


def new_general_tensor4(n, raw_entries, enforce=False) -> GeneralTensor4:
    """Build a GeneralTensor4, validating the weak symmetry b_ijkl = b_jilk.

    With enforce on, the weak symmetry is imposed by pair averaging.
    """
    if int(n) < 2:
        raise DimensionTooSmall(f"dimension must be at least 2, got {n}")
    n = int(n)
    b = _as_entries(n, raw_entries)
    if not np.all(np.isfinite(b)):
        raise NonFiniteEntry("non-finite entry in tensor input")
    bw = 0.5 * (b + b.transpose(1, 0, 3, 2))
    if enforce:
        b = bw
    else:
        dev = float(np.abs(b - bw).max())
        scale = float(np.abs(b).max())
        if dev > WEAK_SYMMETRY_RTOL * max(scale, 1e-300):
            raise SymmetryViolation(
                f"entries violate the weak symmetry b_ijkl = b_jilk "
                f"(deviation {dev:.3e})",
                deviation=dev,
            )
        b = bw
    return GeneralTensor4(n=n, entries=np.ascontiguousarray(b))


def identity_tensor(n) -> ElasticityTensor:
    """The identity element E: e_iikk = 1, all other entries 0.

    Satisfies E x^2 y^2 = (x'x)(y'y); its M-eigenvalues all equal 1.
    """
    if int(n) < 2:
        raise DimensionTooSmall(f"dimension must be at least 2, got {n}")
    n = int(n)
    e = identity_entries(n)
    return ElasticityTensor(n=n, entries=e)


def identity_entries(n) -> np.ndarray:
    e = np.zeros((n, n, n, n))
    for i in range(n):
        for k in range(n):
            e[i, i, k, k] = 1.0
    return e


def _check_vec(A, v, name):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (A.n,):
        raise DimensionMismatch(
            f"{name} must have shape ({A.n},), got {v.shape}"
        )
    return v


def contract_xxyy(A, x, y) -> float:
    """The biquadratic form A x^2 y^2 = sum a_ijkl x_i x_j y_k y_l."""
    x = _check_vec(A, x, "x")
    y = _check_vec(A, y, "y")
    return float(np.einsum("ijkl,i,j,k,l->", A.entries, x, x, y, y))


def contract_xyy(A, x, y) -> np.ndarray:
    """The vector A x y^2 with components sum_jkl a_ijkl x_j y_k y_l."""
    x = _check_vec(A, x, "x")
    y = _check_vec(A, y, "y")
    return np.einsum("ijkl,j,k,l->i", A.entries, x, y, y)


def contract_xxy(A, x, y) -> np.ndarray:
    """The vector A x^2 y with components sum_ijk a_ijkl x_i x_j y_k."""
    x = _check_vec(A, x, "x")
    y = _check_vec(A, y, "y")
    return np.einsum("ijkl,i,j,k->l", A.entries, x, x, y)


def partial_xx(A, x) -> np.ndarray:
    """The n-by-n matrix A x^2 with entries (A x^2)_kl = sum_ij a_ijkl x_i x_j."""
    x = _check_vec(A, x, "x")
    return np.einsum("ijkl,i,j->kl", A.entries, x, x)


def partial_yy(A, y) -> np.ndarray:
    """The n-by-n matrix A y^2 with entries (A y^2)_ij = sum_kl a_ijkl y_k y_l."""
    y = _check_vec(A, y, "y")
    return np.einsum("ijkl,k,l->ij", A.entries, y, y)


def unfold_x_entries(entries) -> np.ndarray:
    n = entries.shape[0]
    return np.ascontiguousarray(
        entries.transpose(2, 0, 3, 1).reshape(n * n, n * n)
    )


def unfold_y_entries(entries) -> np.ndarray:
    n = entries.shape[0]
    return np.ascontiguousarray(
        entries.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    )


def fold_x_entries(matrix, n) -> np.ndarray:
    """Inverse of unfold_x_entries."""
    return np.ascontiguousarray(
        matrix.reshape(n, n, n, n).transpose(1, 3, 0, 2)
    )


def unfold(A, mode="x") -> UnfoldedMatrix:
    """Unfold a tensor into its n^2-by-n^2 block matrix.

    For weakly symmetric input the result is a symmetric matrix, and
    kron(y, x)' Ax kron(y, x) = A x^2 y^2 = kron(x, y)' Ay kron(x, y).
    """
    if mode not in ("x", "y"):
        raise ValueError(f"mode must be 'x' or 'y', got {mode!r}")
    if mode == "x":
        m = unfold_x_entries(A.entries)
    else:
        m = unfold_y_entries(A.entries)
    return UnfoldedMatrix(matrix=m, mode=mode)


def shuffle_permutation(n) -> np.ndarray:
    """Permutation P with unfold_x = P' unfold_y P (the perfect shuffle)."""
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for k in range(n):
            P[i * n + k, k * n + i] = 1.0
    return P


def shift(A, alpha, beta) -> ElasticityTensor:
    """The scaled shift alpha * (A + beta * E), computed entrywise as
    alpha * a_ijkl + (alpha * beta) * e_ijkl.

    M-eigenvalues transform as mu = alpha * (lambda + beta) with the same
    eigenvectors, so shifted problems share their critical pairs.
    """
    e = identity_entries(A.n)
    out = float(alpha) * A.entries + (float(alpha) * float(beta)) * e
    return ElasticityTensor(n=A.n, entries=np.ascontiguousarray(out))


# ---------------------------------------------------------------------------
# JSON file format
#
#   { "n": <int>, "format": "sparse" | "dense",
#     "entries": sparse -> list of [i, j, k, l, value]  (1-based indices),
#                dense  -> n x n x n x n nested arrays,
#     "symmetrize": <bool, default false> }
#
# Sparse entries not listed (and not implied by orbit expansion) are zero.
# With "symmetrize": true, listed sparse entries are expanded over their
# symmetry orbit; dense input is orbit-averaged.  Writers always emit the
# dense format with the symmetry already applied.
# ---------------------------------------------------------------------------


def tensor_from_dict(doc) -> ElasticityTensor:
    """Parse the tensor file schema from a decoded JSON object."""
    if not isinstance(doc, dict):
        raise ParseError("tensor document must be a JSON object")
    try:
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("missing or non-integer field 'n'") from None
    fmt = doc.get("format")
    if fmt not in ("sparse", "dense"):
        raise ParseError("field 'format' must be 'sparse' or 'dense'")
    symmetrize = bool(doc.get("symmetrize", False))
    if "entries" not in doc:
        raise ParseError("missing field 'entries'")
    entries = doc["entries"]
    if n < 2:
        raise DimensionTooSmall(f"dimension must be at least 2, got {n}")

    if fmt == "dense":
        try:
            raw = np.asarray(entries, dtype=np.float64)
        except (TypeError, ValueError):
            raise ParseError("dense 'entries' must be numeric nested arrays") from None
        if raw.shape != (n, n, n, n):
            raise ParseError(
                f"dense 'entries' must have shape {(n, n, n, n)}, got {raw.shape}"
            )
        return new_elasticity_tensor(n, raw, symmetrize=symmetrize)

    raw = np.zeros((n, n, n, n))
    assigned = {}
    for pos, item in enumerate(entries):
        try:
            i, j, k, l = (int(v) for v in item[:4])
            value = float(item[4])
        except (TypeError, ValueError, IndexError):
            raise ParseError(
                f"sparse entry #{pos} must be [i, j, k, l, value]"
            ) from None
        if len(item) != 5:
            raise ParseError(f"sparse entry #{pos} must have exactly 5 elements")
        if not all(1 <= v <= n for v in (i, j, k, l)):
            raise ParseError(
                f"sparse entry #{pos}: indices {(i, j, k, l)} out of range 1..{n}"
            )
        if not np.isfinite(value):
            raise NonFiniteEntry(f"sparse entry #{pos} has non-finite value")
        if symmetrize:
            slots = {(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k)}
        else:
            slots = {(i, j, k, l)}
        for slot in slots:
            if slot in assigned and abs(assigned[slot] - value) > 1e-12 * max(
                1.0, abs(value)
            ):
                raise ParseError(
                    f"sparse entry #{pos}: conflicting value at {slot} "
                    f"({assigned[slot]} vs {value})"
                )
            assigned[slot] = value
            raw[slot[0] - 1, slot[1] - 1, slot[2] - 1, slot[3] - 1] = value
    return new_elasticity_tensor(n, raw, symmetrize=False)


def tensor_to_dict(A) -> dict:
    """Serialize in the dense format with the symmetry already applied."""
    return {
        "n": int(A.n),
        "format": "dense",
        "symmetrize": False,
        "entries": A.entries.tolist(),
    }


def load_tensor(path) -> ElasticityTensor:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read tensor file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from exc
    return tensor_from_dict(doc)


def save_tensor(A, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tensor_to_dict(A), fh, indent=2, sort_keys=True)
        fh.write("\n")
