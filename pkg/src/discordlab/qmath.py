"""Dense complex linear algebra for small quantum states (dims 2, 4, 8).

Everything operates on plain ``numpy`` complex arrays. Density matrices are
ordinary ``(d, d)`` arrays that satisfy :func:`check_density_matrix`;
producers in this package validate their outputs, consumers assume validity.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

HERMITICITY_ATOL = 1e-8
PSD_ATOL = 1e-10
SUPPORT_CUTOFF = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible dimensions."""


class InvalidStateError(ValueError):
    """Matrix violates the density-matrix invariants."""


class EigenDecomposition(NamedTuple):
    """Spectral decomposition ``m = V diag(w) V^dag`` with ``w`` ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def is_hermitian(m: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    return bool(np.max(np.abs(m - dagger(m))) <= atol)


def check_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    herm_defect = np.max(np.abs(rho - dagger(rho)))
    if herm_defect > atol:
        raise InvalidStateError(f"not Hermitian: max defect {herm_defect:.3e}")
    trace_defect = abs(rho.trace() - 1.0)
    if trace_defect > atol:
        raise InvalidStateError(f"trace differs from 1 by {trace_defect:.3e}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -atol:
        raise InvalidStateError(f"negative eigenvalue {min_eig:.3e}")
    return rho


def hermitian_eig(m: np.ndarray, atol: float = HERMITICITY_ATOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NonHermitianError` if the symmetry defect exceeds ``atol``.
    """
    m = np.asarray(m, dtype=complex)
    defect = np.max(np.abs(m - dagger(m)))
    if defect > atol:
        raise NonHermitianError(f"max |m - m^dag| = {defect:.3e} exceeds {atol:.1e}")
    w, v = np.linalg.eigh(m)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def matrix_power_on_support(
    m: np.ndarray, p: float, cutoff: float = SUPPORT_CUTOFF
) -> np.ndarray:
    """Fractional power ``m^p`` of a PSD matrix, restricted to its support.

    Eigenvalues at or below ``cutoff`` are treated as exact zeros, so negative
    exponents act as pseudo-inverse powers. Eigenvectors are unchanged.
    """
    w, v = hermitian_eig(m)
    fw = np.where(w > cutoff, w, 1.0) ** p
    fw = np.where(w > cutoff, fw, 0.0)
    return (v * fw) @ dagger(v)


def matrix_sqrt_psd(m: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Principal square root of a PSD matrix (support convention as above)."""
    return matrix_power_on_support(m, 0.5, cutoff)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product a (x) b."""
    return np.kron(a, b)


def partial_trace(
    m: np.ndarray, dims: Sequence[int], keep: Sequence[int]
) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    ``dims`` gives the dimension of each tensor factor in order; the result is
    ordered by the ``keep`` sequence and has the products of kept dims as its
    dimension. Raises :class:`DimensionMismatchError` if the factorization
    does not match the matrix.
    """
    m = np.asarray(m)
    dims = list(dims)
    n = len(dims)
    if int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(
            f"dims {dims} do not factor a {m.shape} matrix"
        )
    keep = list(keep)
    if any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise DimensionMismatchError(f"invalid keep set {keep} for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    for offset, ax in enumerate(sorted(traced)):
        a = ax - offset
        t = np.trace(t, axis1=a, axis2=a + t.ndim // 2)
    # Axes now follow the original subsystem order restricted to `keep`;
    # permute to the requested order.
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(k) for k in keep]
    half = t.ndim // 2
    t = t.transpose(perm + [half + p for p in perm])
    d_out = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_out, d_out)


def sqrt_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr sqrt( sqrt(rho) sigma sqrt(rho) ), the square root of the fidelity."""
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    s = matrix_sqrt_psd(rho)
    w = np.linalg.eigvalsh(s @ sigma @ s)
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F = (Tr sqrt( sqrt(rho) sigma sqrt(rho) ))^2."""
    return sqrt_fidelity(rho, sigma) ** 2


def bures_distance_sq(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Bures distance 2 (1 - sqrt(F)), in [0, 2]."""
    return max(0.0, 2.0 * (1.0 - sqrt_fidelity(rho, sigma)))


def hellinger_distance_sq(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Hellinger distance 2 (1 - Tr sqrt(rho) sqrt(sigma)), in [0, 2]."""
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    affinity = np.trace(matrix_sqrt_psd(rho) @ matrix_sqrt_psd(sigma)).real
    return max(0.0, 2.0 * (1.0 - affinity))


def hs_distance_sq(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Hilbert-Schmidt (Frobenius) distance sum |rho_ij - sigma_ij|^2."""
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    d = rho - sigma
    return float(np.vdot(d, d).real)
