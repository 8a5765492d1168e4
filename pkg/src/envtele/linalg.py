"""
Dense complex linear algebra for small operators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Every
spectral quantity (matrix exponentials, square roots, fidelities, trace
distances) goes through :func:`herm_eig`, so there is exactly one numerical
core to test.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

ComplexMatrix = npt.NDArray[np.complex128]

# Eigenvalues down to this value are treated as roundoff of a zero eigenvalue.
PSD_NEGATIVE_TOL = 1e-10
# Relative floor under which an eigenvalue is indistinguishable from zero.
_ZERO_FLOOR = 64 * np.finfo(float).eps


class LinalgError(ValueError):
    """Raised when an input violates a structural precondition."""


def as_matrix(m) -> ComplexMatrix:
    """Return ``m`` as a square complex128 array, raising on bad shape."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise LinalgError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.transpose(m))


def op_norm(m: ComplexMatrix) -> float:
    """Spectral (largest singular value) norm."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, ord=2))


def _scale(m: ComplexMatrix) -> float:
    return max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)


def is_hermitian(m, tol: float = 1e-10) -> bool:
    a = as_matrix(m)
    return op_norm(a - dagger(a)) <= tol * _scale(a)


def is_unitary(m, tol: float = 1e-10) -> bool:
    a = as_matrix(m)
    return op_norm(dagger(a) @ a - np.eye(a.shape[0])) <= tol


def is_psd(m, tol: float = 1e-10) -> bool:
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        return False
    return bool(np.linalg.eigvalsh(_hermitize(a))[0] >= -tol)


def is_density(m, tol: float = 1e-10) -> bool:
    """Hermitian, positive semidefinite and of unit trace."""
    a = as_matrix(m)
    return is_psd(a, tol) and abs(np.trace(a) - 1.0) <= tol


def _hermitize(m: ComplexMatrix) -> ComplexMatrix:
    return 0.5 * (m + dagger(m))


def kron(a, b) -> ComplexMatrix:
    """Kronecker product; entry ``[i*n + k, j*n + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(factors: Iterable) -> ComplexMatrix:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def partial_trace(m, factor_dims: Sequence[int], keep: Iterable[int]) -> ComplexMatrix:
    """
    Reduce ``m`` onto the tensor factors listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Operator on ``prod(factor_dims)`` dimensions, factors ordered with the
        first factor most significant (the :func:`kron` convention).
    factor_dims : sequence of int
        Dimension of each tensor factor.
    keep : iterable of int
        Indices of the factors to retain. Kept factors stay in their original
        relative order.

    Returns
    -------
    ndarray
        The reduced operator. ``Tr`` of the result equals ``Tr(m)``.
    """
    a = as_matrix(m)
    dims = [int(d) for d in factor_dims]
    if any(d < 1 for d in dims):
        raise LinalgError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != a.shape[0]:
        raise LinalgError(
            f"factor dimensions {dims} do not multiply to matrix dimension {a.shape[0]}"
        )
    kept = sorted(set(int(k) for k in keep))
    if not kept:
        raise LinalgError("keep must name at least one factor")
    if kept[0] < 0 or kept[-1] >= len(dims):
        raise LinalgError(f"keep indices {kept} out of range for {len(dims)} factors")

    n = len(dims)
    t = a.reshape(dims + dims)
    traced = [i for i in range(n) if i not in kept]
    # contract each traced row index with its column partner, highest first
    for idx in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=idx, axis2=idx + cur)
    d_keep = int(np.prod([dims[k] for k in kept]))
    return t.reshape(d_keep, d_keep)


def herm_eig(h, tol: float = 1e-10) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """
    Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary ``V`` with
    ``h = V @ diag(w) @ V^†``. Raises :class:`LinalgError` if ``h`` is not
    Hermitian within ``tol`` (relative to its largest entry).
    """
    a = as_matrix(h)
    if not is_hermitian(a, tol):
        raise LinalgError("herm_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(_hermitize(a))
    return w, v


def _apply_spectral(w, v, f) -> ComplexMatrix:
    return (v * f(w)) @ dagger(v)


def expm_unitary(v, t: float, hbar: float = 1.0) -> ComplexMatrix:
    """Return ``exp(-i v t / hbar)`` for Hermitian ``v``."""
    w, vec = herm_eig(v)
    return _apply_spectral(w, vec, lambda lam: np.exp(-1j * lam * t / hbar))


def _clamped_spectrum(w: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    if w.size and w[0] < -PSD_NEGATIVE_TOL:
        raise LinalgError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    floor = _ZERO_FLOOR * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    out = np.where(w < floor, 0.0, w)
    return out


def sqrt_psd(m) -> ComplexMatrix:
    """
    Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero, as are positive
    eigenvalues at roundoff level relative to the largest one. Anything more
    negative raises :class:`LinalgError`.
    """
    w, v = herm_eig(m)
    return _apply_spectral(_clamped_spectrum(w), v, np.sqrt)


def uhlmann_fidelity(r1, r2) -> float:
    """
    Fidelity ``[Tr sqrt(sqrt(r1) r2 sqrt(r1))]**2``.

    Both arguments must be Hermitian positive semidefinite of equal size.
    Subnormalized inputs are accepted and give a correspondingly scaled
    result; the return value is clipped to ``[0, 1]``.
    """
    a, b = as_matrix(r1), as_matrix(r2)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.shape} vs {b.shape}")
    s = sqrt_psd(a)
    _clamped_spectrum(herm_eig(b)[0])
    w, _ = herm_eig(_hermitize(s @ b @ s), tol=1e-8)
    root_trace = float(np.sum(np.sqrt(_clamped_spectrum(w))))
    return float(min(1.0, max(0.0, root_trace**2)))


def trace_distance(r1, r2) -> float:
    """Half the sum of absolute eigenvalues of ``r1 - r2``."""
    a, b = as_matrix(r1), as_matrix(r2)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w, _ = herm_eig(a - b)
    return 0.5 * float(np.sum(np.abs(w)))


def purity(m) -> float:
    a = as_matrix(m)
    return float(np.real(np.trace(a @ a)))
