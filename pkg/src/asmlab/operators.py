"""Dense complex linear algebra with explicit tolerances.

Everything here works on plain complex numpy matrices.  Operators are
validated at API boundaries with :func:`as_operator`; all functions are pure
and never mutate their arguments, so values can be shared freely between
threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateSpectrumError, InvalidInputError

DEFAULT_MAX_DIM = 512


def max_dim() -> int:
    """Operator dimension cap; override with the ASMLAB_MAX_DIM env var."""
    raw = os.environ.get("ASMLAB_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"ASMLAB_MAX_DIM is not an integer: {raw!r}") from exc
    if value < 1:
        raise InvalidInputError("ASMLAB_MAX_DIM must be >= 1")
    return value


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used throughout the package.

    eig_tol bounds acceptable Hermiticity/clustering error, psd_tol how far
    below zero an eigenvalue may dip while still counting as positive, and
    rank_tol the relative singular-value cutoff for numerical rank.
    """

    eig_tol: float = 1e-10
    psd_tol: float = 1e-9
    rank_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("eig_tol", "psd_tol", "rank_tol"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"Tolerance.{name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_operator(m: np.ndarray) -> np.ndarray:
    """Validate and return a square, finite, complex matrix.

    Raises InvalidInputError on non-square shape, NaN/Inf entries, or
    dimension above the configured cap.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"operator must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise InvalidInputError("operator dimension must be >= 1")
    if arr.shape[0] > max_dim():
        raise InvalidInputError(
            f"operator dimension {arr.shape[0]} exceeds cap {max_dim()} "
            "(set ASMLAB_MAX_DIM to raise it)"
        )
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvalidInputError("operator entries must be finite")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.swapaxes(m, -1, -2))


def op_norm(m: np.ndarray) -> float:
    """Operator (spectral) norm: the largest singular value."""
    arr = as_operator(m)
    return float(np.linalg.norm(arr, 2))


def is_hermitian(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff ||m - m*|| <= eig_tol."""
    arr = as_operator(m)
    return float(np.linalg.norm(arr - dagger(arr), 2)) <= tol.eig_tol


def hermitian_eig(
    m: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix U) with
    m = U diag(w) U*.  Ties in degenerate eigenvalues are broken arbitrarily;
    any function of the matrix is unaffected by that choice.
    """
    arr = as_operator(m)
    if not is_hermitian(arr, tol):
        raise InvalidInputError("matrix is not Hermitian within eig_tol")
    w, u = np.linalg.eigh(arr)
    return w, u


def fun_calc(
    m: np.ndarray, f: Callable[[np.ndarray], np.ndarray], tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Apply a real-to-real (or real-to-complex) function to a Hermitian matrix.

    f is evaluated on the eigenvalue vector (numpy-vectorized or scalar
    callable) and the matrix U diag(f(w)) U* is returned.
    """
    w, u = hermitian_eig(m, tol)
    try:
        fw = np.asarray(f(w), dtype=complex)
        if fw.shape != w.shape:
            raise TypeError
    except (TypeError, ValueError):
        fw = np.array([f(x) for x in w], dtype=complex)
    return (u * fw) @ dagger(u)


def spectral_projector(
    m: np.ndarray, cutoff: float, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Spectral projection of a Hermitian matrix onto eigenvalues above ``cutoff``.

    Requires an eigenvalue-free band of half-width eig_tol around the cutoff
    so the projector is well defined under floating point; otherwise raises
    DegenerateSpectrumError.
    """
    w, u = hermitian_eig(m, tol)
    if np.any(np.abs(w - cutoff) <= tol.eig_tol):
        raise DegenerateSpectrumError(
            f"eigenvalue within {tol.eig_tol} of threshold {cutoff}"
        )
    mask = (w > cutoff).astype(complex)
    return (u * mask) @ dagger(u)


def is_positive(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff m is Hermitian within eig_tol and its spectrum is >= -psd_tol."""
    arr = as_operator(m)
    if not is_hermitian(arr, tol):
        return False
    w = np.linalg.eigvalsh(arr)
    return bool(w[0] >= -tol.psd_tol)


def numerical_rank(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    """Count of singular values above rank_tol * max(1, ||m||)."""
    arr = as_operator(m)
    s = np.linalg.svd(arr, compute_uv=False)
    if s.size == 0:
        return 0
    threshold = tol.rank_tol * max(1.0, float(s[0]))
    return int(np.count_nonzero(s > threshold))
