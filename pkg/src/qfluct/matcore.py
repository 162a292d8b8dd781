"""Dense complex-matrix helpers and the Hermitian spectral routines.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything here is
a pure function; nothing mutates its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import DimensionMismatch, NotHermitian, NotPositiveDefinite


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and matching rank-1 eigenprojectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, gauge-fixed
    projectors: tuple
    degenerate: bool

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * P for lam, P in zip(self.eigenvalues, self.projectors))


def as_matrix(a, dim: int | None = None) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {m.shape[0]}")
    return m


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


def mul(*mats) -> np.ndarray:
    out = as_matrix(mats[0])
    for m in mats[1:]:
        m = as_matrix(m)
        if out.shape[1] != m.shape[0]:
            raise DimensionMismatch(f"cannot multiply {out.shape} by {m.shape}")
        out = out @ m
    return out


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _check_pair(a, b)
    return a + b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def max_abs_diff(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    _check_pair(a, b)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def allclose(a, b, atol: float | None = None) -> bool:
    """Entrywise comparison with an absolute tolerance (default ``Tolerances.entry``)."""
    atol = tolerances.current().entry if atol is None else atol
    return max_abs_diff(a, b) <= atol


def is_hermitian(a, atol: float | None = None) -> bool:
    atol = tolerances.current().hermiticity if atol is None else atol
    a = as_matrix(a)
    return max_abs_diff(a, a.conj().T) <= atol


def hermitize(a) -> np.ndarray:
    a = as_matrix(a)
    return 0.5 * (a + a.conj().T)


def _fix_gauge(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    # lowest index among (numerically) tied largest components
    k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    phase = vec[k] / mags[k]
    return vec * np.conj(phase)


def hermitian_eig(a, hermiticity_tol: float | None = None) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues come back in descending order. Each eigenvector is rotated so
    that its largest-magnitude entry (lowest index on ties) is real and
    non-negative, which makes the output deterministic for golden tests.

    Raises:
        NotHermitian: if ``a`` deviates from its adjoint by more than
            ``hermiticity_tol``.
    """
    tol = tolerances.current()
    a = as_matrix(a)
    if not is_hermitian(a, hermiticity_tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(hermitize(a))
    w, v = w[::-1].copy(), v[:, ::-1]
    v = np.column_stack([_fix_gauge(v[:, k]) for k in range(v.shape[1])])
    projectors = tuple(np.outer(v[:, k], v[:, k].conj()) for k in range(v.shape[1]))
    degenerate = bool(len(w) > 1 and np.min(np.abs(np.diff(w))) < tol.degeneracy)
    return SpectralDecomposition(w, v, projectors, degenerate)


def matrix_power_hermitian(a, exponent: complex, spectral: SpectralDecomposition | None = None) -> np.ndarray:
    """``sum_mu lambda_mu**exponent P_mu`` for a positive-definite Hermitian matrix.

    ``lambda**z`` is evaluated as ``exp(z * ln(lambda))`` (principal branch).
    """
    sd = hermitian_eig(a) if spectral is None else spectral
    floor = tolerances.current().positive_definite
    if np.any(sd.eigenvalues <= floor):
        raise NotPositiveDefinite(f"smallest eigenvalue {sd.eigenvalues.min():.3e} <= {floor:g}")
    powers = np.exp(complex(exponent) * np.log(sd.eigenvalues))
    return (sd.eigenvectors * powers) @ sd.eigenvectors.conj().T


def log_hermitian(a, spectral: SpectralDecomposition | None = None) -> np.ndarray:
    sd = hermitian_eig(a) if spectral is None else spectral
    floor = tolerances.current().positive_definite
    if np.any(sd.eigenvalues <= floor):
        raise NotPositiveDefinite(f"smallest eigenvalue {sd.eigenvalues.min():.3e} <= {floor:g}")
    return (sd.eigenvectors * np.log(sd.eigenvalues)) @ sd.eigenvectors.conj().T


# random sampling helpers used by property tests and scripts

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (z + z.conj().T)


def random_density_matrix(dim: int, rng: np.random.Generator, min_eig: float = 0.0) -> np.ndarray:
    """Random full-rank state; eigenvalues are Dirichlet draws floored at ``min_eig``."""
    p = rng.dirichlet(np.ones(dim))
    p = min_eig + (1 - dim * min_eig) * p
    u = random_unitary(dim, rng)
    return (u * p) @ u.conj().T
