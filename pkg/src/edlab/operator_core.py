"""Dense complex-matrix primitives.

Every matrix in the package is a plain ``numpy.ndarray`` of dtype
``complex128``. The helpers here add the validation and spectral routines
the rest of the package relies on: Hermiticity checks with symmetrization,
descending eigen-decompositions, PSD square roots, trace norms and the
sign/absolute-value split of a self-adjoint operator.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError, NotHermitianError, NotPositiveError

__all__ = [
    "HERMITIAN_TOL",
    "ZERO_TOL",
    "MAX_DIMENSION",
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "SpectralDecomposition",
    "as_matrix",
    "hermitian",
    "adjoint",
    "commutator",
    "tensor_product",
    "partial_trace",
    "spectral_decompose",
    "psd_sqrt",
    "trace_norm",
    "operator_abs",
    "support_projection",
    "fro",
]

#: Relative tolerance used to accept an input as self-adjoint.
HERMITIAN_TOL = 1e-9
#: Relative threshold below which an eigenvalue counts as exactly zero.
ZERO_TOL = 1e-10
#: Largest matrix dimension accepted by the spectral routines.
MAX_DIMENSION = 64

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

for _p in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
    _p.setflags(write=False)


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in descending order with eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def fro(m) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite complex 2-D array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    return arr


def _check_size(arr: np.ndarray) -> None:
    if max(arr.shape) > MAX_DIMENSION:
        raise DimensionError(
            f"dimension {max(arr.shape)} exceeds MAX_DIMENSION={MAX_DIMENSION}"
        )


def hermitian(m, tol: float = HERMITIAN_TOL, *, name: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is self-adjoint and return its Hermitian part.

    Raises
    ------
    NotHermitianError
        If ``||m - m^dagger||_F > tol * max(1, ||m||_F)``. The message
        carries the measured delta.
    """
    arr = as_matrix(m, square=True, name=name)
    delta = fro(arr - arr.conj().T)
    if delta > tol * max(1.0, fro(arr)):
        raise NotHermitianError(
            f"{name} is not Hermitian: ||M - M^dagger||_F = {delta:.3e}"
        )
    return (arr + arr.conj().T) / 2


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba``."""
    a = as_matrix(a, square=True, name="a")
    b = as_matrix(b, square=True, name="b")
    if a.shape != b.shape:
        raise DimensionError(f"commutator of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(x, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    x : array_like
        Operator on ``C^d1 (x) C^d2``.
    dims : (int, int)
        Factor dimensions ``(d1, d2)``.
    which : {1, 2}
        Factor to trace over (1-based, matching ``dims``).
    """
    d1, d2 = (int(d) for d in dims)
    x = as_matrix(x, square=True, name="x")
    if x.shape[0] != d1 * d2:
        raise DimensionError(f"x has dimension {x.shape[0]}, expected {d1}*{d2}")
    t = x.reshape(d1, d2, d1, d2)
    if which == 2:
        return np.einsum("ijkj->ik", t)
    if which == 1:
        return np.einsum("ijil->jl", t)
    raise DimensionError(f"factor index must be 1 or 2, got {which!r}")


def spectral_decompose(h, tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    """Eigen-decomposition of a self-adjoint matrix, eigenvalues descending."""
    h = hermitian(h, tol)
    _check_size(h)
    w, u = np.linalg.eigh(h)
    return SpectralDecomposition(w[::-1].copy(), u[:, ::-1].copy())


def _zero_threshold(w: np.ndarray) -> float:
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return ZERO_TOL * max(1.0, scale)


def psd_sqrt(p, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Positive square root of a PSD matrix.

    Eigenvalues in ``[-tol * scale, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPositiveError`.
    """
    w, u = spectral_decompose(p, tol)
    floor = -tol * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    if w.size and w[-1] < floor:
        raise NotPositiveError(f"matrix has eigenvalue {w[-1]:.3e} < 0")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (u * w) @ u.conj().T


def trace_norm(t) -> float:
    """Sum of singular values of a square matrix."""
    t = as_matrix(t, square=True, name="t")
    _check_size(t)
    if t.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(t, compute_uv=False)))


def operator_abs(t, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split a self-adjoint ``t`` as ``sign(t) @ |t|``.

    Eigenvalues within ``ZERO_TOL`` (relative) of zero get sign 0, so
    ``sign(t)`` is a self-adjoint partial isometry whose square is the
    support projection of ``t``.
    """
    w, u = spectral_decompose(t, tol)
    thr = _zero_threshold(w)
    sign = np.where(w > thr, 1.0, np.where(w < -thr, -1.0, 0.0))
    mag = np.where(sign == 0.0, 0.0, np.abs(w))
    return (u * sign) @ u.conj().T, (u * mag) @ u.conj().T


def support_projection(t, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Projection onto the range of a self-adjoint matrix."""
    w, u = spectral_decompose(t, tol)
    keep = np.abs(w) > _zero_threshold(w)
    v = u[:, keep]
    return v @ v.conj().T
